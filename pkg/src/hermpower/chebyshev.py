"""Chebyshev expansion of x**t and its application to sparse matrices.

For every integer ``t >= 0``::

    x**t = sum_{m <= t, m = t mod 2} p_m T_m(x)

with ``p_0 = C(t, t/2) / 2**t`` and ``p_m = 2 C(t, (t-m)/2) / 2**t`` for ``m > 0``.
The ``p_m`` form a probability distribution concentrated on ``m ~ sqrt(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .matrix import GeneralSparseMatrix


@dataclass(frozen=True, eq=False)
class ChebyshevWeights:
    """The distribution ``p_m`` for a fixed power ``t``; ``probs[m]`` is ``p_m``."""

    power: int
    probs: np.ndarray

    def __getitem__(self, m: int) -> float:
        if 0 <= m <= self.power:
            return float(self.probs[m])
        return 0.0

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.power % 2, self.power + 1, 2)

    def as_dict(self) -> dict[int, float]:
        return {int(m): float(self.probs[m]) for m in self.support}

    def truncated(self, tau: int) -> np.ndarray:
        """Weights ``p_0..p_tau`` (not renormalised)."""
        return self.probs[: min(tau, self.power) + 1].copy()


def weights(t: int) -> ChebyshevWeights:
    """Binomial Chebyshev weights for ``x**t``.

    Starts from the central binomial term (via ``lgamma``) and walks outward with
    the exact ratio ``C(t, k-1) / C(t, k) = k / (t-k+1)``, so nothing overflows for
    large ``t``. The result is renormalised to absorb the ``lgamma`` rounding.
    """
    if t < 0:
        raise PreconditionError(f"power must be non-negative, got {t}")
    probs = np.zeros(t + 1)
    k0 = t // 2  # m = t - 2k is 0 (t even) or 1 (t odd)
    log_central = math.lgamma(t + 1) - math.lgamma(k0 + 1) - math.lgamma(t - k0 + 1) - t * math.log(2)
    term = math.exp(log_central)
    for k in range(k0, -1, -1):
        m = t - 2 * k
        probs[m] = term if m == 0 else 2.0 * term
        if k > 0:
            term *= k / (t - k + 1)
    probs /= probs.sum()
    return ChebyshevWeights(t, probs)


def sample_order(w: ChebyshevWeights, rng: np.random.Generator, size=None):
    """Draw Chebyshev orders ``m`` from ``p_m``."""
    return rng.choice(w.power + 1, size=size, p=w.probs)


def expected_order(t: int) -> float:
    """Mean order ``sum_m m p_m`` by direct summation."""
    w = weights(t)
    return float(np.dot(np.arange(t + 1), w.probs))


def apply_chebyshev(a: GeneralSparseMatrix, psi, m: int) -> np.ndarray:
    """Return ``T_m(A) psi`` with ``m`` sparse mat-vecs of the stored matrix."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (a.dim,):
        raise PreconditionError(f"vector of length {psi.shape} does not match dimension {a.dim}")
    if m < 0:
        raise PreconditionError("order must be non-negative")
    if m == 0:
        return psi.copy()
    prev, cur = psi, a.matvec(psi)
    for _ in range(m - 1):
        prev, cur = cur, 2.0 * a.matvec(cur) - prev
    return cur


def chebyshev_series(a: GeneralSparseMatrix, psi, coeffs) -> np.ndarray:
    """Return ``sum_m coeffs[m] T_m(A) psi`` in one recurrence sweep."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (a.dim,):
        raise PreconditionError(f"vector of length {psi.shape} does not match dimension {a.dim}")
    coeffs = np.asarray(coeffs)
    out = coeffs[0] * psi
    if len(coeffs) == 1:
        return out
    prev, cur = psi, a.matvec(psi)
    out = out + coeffs[1] * cur
    for c in coeffs[2:]:
        prev, cur = cur, 2.0 * a.matvec(cur) - prev
        out = out + c * cur
    return out


def chebyshev_values(x, m_max: int) -> np.ndarray:
    """``T_0(x) .. T_{m_max}(x)`` for scalar or array ``x`` in [-1, 1]; shape ``(m_max+1, *x.shape)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((m_max + 1,) + x.shape)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = x
    for k in range(2, m_max + 1):
        out[k] = 2.0 * x * out[k - 1] - out[k - 2]
    return out


@dataclass(frozen=True)
class TruncationPlan:
    cutoff: int
    guaranteed_error: float
    constant: float
    power: int

    def truncated_sum(self, x) -> np.ndarray:
        """Scalar ``sum_{m <= cutoff} p_m T_m(x)``."""
        w = weights(self.power).truncated(self.cutoff)
        return np.tensordot(w, chebyshev_values(x, len(w) - 1), axes=1)


def truncation_plan(t: int, eps: float) -> TruncationPlan:
    """Smallest Chebyshev cutoff guaranteeing ``|x^t - sum_{m<=tau} p_m T_m(x)| <= eps`` on [-1, 1].

    ``tau = ceil(sqrt(C t))`` with ``C = max(2 ln(2/eps), 1)``; the tail mass of a
    binomial beyond ``sqrt(C t)`` is at most ``2 exp(-C/2) <= eps``.
    """
    if t < 0:
        raise PreconditionError("power must be non-negative")
    if not eps > 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    c = max(2.0 * math.log(2.0 / eps), 1.0)
    tau = math.ceil(math.sqrt(c * t))
    return TruncationPlan(cutoff=min(tau, t), guaranteed_error=eps, constant=c, power=t)
