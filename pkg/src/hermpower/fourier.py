"""Fourier-series powering: ``x**t`` on [-1, 1] as a short sum of harmonics.

Even powers expand in ``cos(p pi x)``, odd powers in ``sin((2p+1) pi x / 2)``::

    c_p(t) = 2 int_0^1 x^t cos(p pi x) dx         (p >= 1),  c_0(t) = 1/(t+1)
    s_p(t) = 2 int_0^1 x^t sin((2p+1) pi x / 2) dx

Every harmonic is ``Re`` or ``Im`` of ``exp(i pi n x / 2)`` with ``n = 2p`` (even) or
``n = 2p+1`` (odd), so ``<psi|A^t|psi>`` follows from the overlaps
``<psi|exp(i pi n A / 2)|psi>`` of Hamiltonian evolutions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianMethodError, PreconditionError
from .ledger import EstimateReport, QueryLedger
from .matrix import STABILITY_TOL, GeneralSparseMatrix

NORM_TOL = 1e-8
#: Extra powers above ``t`` at which the downward sweep starts.
DOWNWARD_MARGIN = 40


def _wavenumbers(n_h: int, odd: bool) -> np.ndarray:
    p = np.arange(n_h + 1, dtype=float)
    return (p + 0.5) * math.pi if odd else p * math.pi


def _parity_table(t_max: int, n_h: int, odd: bool) -> np.ndarray:
    """Rows ``tau = odd, odd+2, ..., <= t_max`` of ``c_p`` or ``s_p`` for ``p <= n_h``.

    The recursion ``f(tau) = 2(-1)^p tau/k^2 - tau(tau-1)/k^2 f(tau-2)`` amplifies
    errors by ``tau(tau-1)/k^2`` per step, so it is run forward only while that
    factor is at most 1. Beyond it the inverted recursion is run downward from
    ``T = 3 t_max + 40``, seeded with the leading asymptotic ``2(-1)^p/(T+1)``;
    there the factor ``k^2/(tau(tau-1)) < 1`` damps the seed error.
    """
    start = 1 if odd else 0
    taus = np.arange(start, t_max + 1, 2)
    k2 = _wavenumbers(n_h, odd) ** 2
    sign = np.where(np.arange(n_h + 1) % 2 == 0, 1.0, -1.0)
    out = np.zeros((len(taus), n_h + 1))
    if len(taus) == 0:
        return out

    # forward from the base case c_p(0) = 0 (p >= 1) or s_p(1) = 2(-1)^p/k^2
    # the discarded unstable direction may overflow; it is masked out below
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        prev = 2.0 * sign / k2 if odd else np.zeros(n_h + 1)
        out[0] = prev
        for r in range(1, len(taus)):
            tau = taus[r]
            prev = (2.0 * sign * tau - tau * (tau - 1) * prev) / k2
            out[r] = prev

    stable_fwd = taus[:, None] * (taus[:, None] - 1) <= k2[None, :]
    if not stable_fwd.all():
        top = 3 * t_max + DOWNWARD_MARGIN
        top += (top - start) % 2
        cur = 2.0 * sign / (top + 1)
        down = np.empty_like(out)
        tau = top
        with np.errstate(over="ignore", invalid="ignore"):
            while tau > start:
                if tau <= t_max:
                    down[(tau - start) // 2] = cur
                cur = (2.0 * sign * tau - k2 * cur) / (tau * (tau - 1))
                tau -= 2
        down[0] = cur
        out = np.where(stable_fwd, out, down)

    if not odd:
        out[:, 0] = 1.0 / (taus + 1)
    return out


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """Cosine (even ``t``) or half-integer sine (odd ``t``) coefficients for ``p = 0..N_h``."""

    power: int
    coeffs: np.ndarray

    @property
    def parity(self) -> str:
        return "odd" if self.power % 2 else "even"

    @property
    def n_harmonics(self) -> int:
        return len(self.coeffs) - 1

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    @property
    def harmonic_index(self) -> np.ndarray:
        """Exponent ``n`` in ``exp(i pi n x / 2)`` carried by each coefficient."""
        p = np.arange(len(self.coeffs))
        return 2 * p + 1 if self.power % 2 else 2 * p

    def exponential_form(self) -> dict[int, complex]:
        """Coefficients ``a_n`` of ``sum_n a_n exp(i pi n x / 2)`` over ``n`` of both signs."""
        out: dict[int, complex] = {}
        for n, c in zip(self.harmonic_index, self.coeffs):
            n = int(n)
            if self.power % 2:
                out[n] = c / 2j
                out[-n] = -c / 2j
            elif n == 0:
                out[0] = complex(c)
            else:
                out[n] = out[-n] = complex(c / 2)
        return dict(sorted(out.items()))

    def evaluate(self, x) -> np.ndarray:
        return scalar_series_eval(self, x)


def coefficients(t: int, n_h: int) -> FourierCoefficients:
    """``c_p(t)`` (even ``t``) or ``s_p(t)`` (odd ``t``) for ``p <= n_h`` in ``O(n_h t)`` work."""
    if t < 1:
        raise PreconditionError(f"power must be >= 1, got {t}")
    if n_h < 0:
        raise PreconditionError("number of harmonics must be non-negative")
    return FourierCoefficients(t, _parity_table(t, n_h, bool(t % 2))[-1].copy())


def coefficient_table(t: int, n_h: int) -> list[FourierCoefficients | None]:
    """Coefficients for every power ``1..t``, sharing one sweep per parity; entry 0 is None."""
    if t < 0 or n_h < 0:
        raise PreconditionError("t and n_h must be non-negative")
    table: list[FourierCoefficients | None] = [None] * (t + 1)
    for odd in (False, True):
        rows = _parity_table(t, n_h, odd)
        for r, tau in enumerate(range(int(odd), t + 1, 2)):
            if tau > 0:
                table[tau] = FourierCoefficients(tau, rows[r].copy())
    return table


def scalar_series_eval(coeffs: FourierCoefficients, x) -> np.ndarray:
    """Evaluate the truncated series at ``x`` (scalar or array in [-1, 1])."""
    x = np.asarray(x, dtype=float)
    arg = np.multiply.outer(x, coeffs.harmonic_index * (math.pi / 2))
    basis = np.sin(arg) if coeffs.power % 2 else np.cos(arg)
    return basis @ coeffs.coeffs


def tail_bound(t: int, n: int) -> float:
    """Upper bound ``(1/pi) ln((n pi + t)/(n pi - t))`` on the coefficient mass beyond ``p = n``."""
    if not n * math.pi > t:
        return math.inf
    return math.log((n * math.pi + t) / (n * math.pi - t)) / math.pi


@dataclass(frozen=True)
class HarmonicPlan:
    n_h: int
    guaranteed_error: float
    bound_value: float
    power: int


def harmonics_needed(t: int, eps: float) -> HarmonicPlan:
    """Harmonic count ``N_h = ceil(t / (pi tanh(pi eps / 2)))`` with tail mass at most ``eps``."""
    if not 0 < eps < 2 / math.pi:
        raise PreconditionError(f"eps must lie in (0, 2/pi), got {eps}")
    if t < 0:
        raise PreconditionError("power must be non-negative")
    n_h = math.ceil(t / (math.pi * math.tanh(math.pi * eps / 2)))
    bound = tail_bound(t, n_h) if t > 0 else 0.0
    if bound > eps * (1 + 1e-12):
        raise AssertionError(f"tail bound {bound} exceeds eps {eps}")
    return HarmonicPlan(n_h, eps, bound, t)


def _check_inputs(a: GeneralSparseMatrix, psi) -> np.ndarray:
    if not a.hermitian_flag:
        raise NonHermitianMethodError("Hamiltonian simulation requires a Hermitian matrix")
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (a.dim,):
        raise PreconditionError(f"state of shape {psi.shape} does not match N={a.dim}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise PreconditionError("state must be normalized")
    return psi


def simulation_cost(sparsity: int, n: int, eps: float) -> int:
    """Modeled oracle calls for one evolution ``exp(i pi n A / 2)`` to precision ``eps``: ``D |n| / eps``."""
    return math.ceil(sparsity * abs(n) / eps)


class HamiltonianSimulator:
    """Overlaps ``<psi|exp(i pi n A / 2)|psi>`` for integer ``n``.

    ``mode="spectral"`` uses one Hermitian eigendecomposition for all ``n``.
    ``mode="stepped"`` applies the unit propagator ``exp(i pi A / 2)`` ``|n|`` times
    from scratch for every ``n``, so its run time is linear in the evolution time,
    like a physical simulator.
    """

    def __init__(self, a: GeneralSparseMatrix, psi, mode: str = "spectral"):
        if mode not in ("spectral", "stepped"):
            raise PreconditionError(f"unknown simulator mode {mode!r}")
        self.psi = _check_inputs(a, psi)
        self.mode = mode
        evals, evecs = np.linalg.eigh(a.todense())
        if evals.size and np.max(np.abs(evals)) > 1.0 + STABILITY_TOL:
            raise PreconditionError(f"matrix is not stable: spectral radius {np.max(np.abs(evals))}")
        self._evals = evals
        self._weights = np.abs(evecs.conj().T @ self.psi) ** 2
        if mode == "stepped":
            self._step = (evecs * np.exp(0.5j * math.pi * evals)) @ evecs.conj().T

    def overlap(self, n: int) -> complex:
        if n == 0:
            return 1.0 + 0j
        if self.mode == "spectral":
            return complex(np.dot(self._weights, np.exp(0.5j * math.pi * n * self._evals)))
        x = self.psi
        for _ in range(abs(n)):
            x = self._step @ x
        z = complex(np.vdot(self.psi, x))
        return z if n > 0 else z.conjugate()


def evolution_overlap(a: GeneralSparseMatrix, psi, n: int) -> complex:
    """``<psi|exp(i pi n A / 2)|psi>`` by dense eigendecomposition."""
    return HamiltonianSimulator(a, psi).overlap(n)


def power_overlaps(a: GeneralSparseMatrix, psi, t: int, eps: float,
                   ledger: QueryLedger | None = None, simulator: str = "spectral") -> np.ndarray:
    """``<psi|A^tau|psi>`` for every ``tau = 0..t`` from one set of evolutions.

    Harmonics are chosen for ``t`` with half the budget (``eps/2``); the same
    overlaps serve every smaller power because the tail bound grows with ``t``.
    Overlaps are evaluated exactly, which leaves the other half as slack.
    """
    psi = _check_inputs(a, psi)
    if t < 0:
        raise PreconditionError("power must be non-negative")
    out = np.zeros(t + 1, dtype=np.complex128)
    out[0] = 1.0
    if t == 0:
        return out
    plan = harmonics_needed(t, eps / 2)
    sim = HamiltonianSimulator(a, psi, simulator)
    n_max = 2 * plan.n_h + 1
    ov = np.array([sim.overlap(n) for n in range(n_max + 1)])
    if ledger is not None:
        ledger.mode = "analytic"
        ledger.charge_calls(sum(simulation_cost(a.sparsity, n, eps / 2) for n in range(1, n_max + 1)))
    table = coefficient_table(t, plan.n_h)
    cos_terms = ov[0::2].real
    sin_terms = ov[1::2].imag
    for tau in range(1, t + 1):
        fc = table[tau]
        terms = sin_terms if tau % 2 else cos_terms
        out[tau] = float(np.dot(fc.coeffs, terms[: len(fc.coeffs)]))
    return out


def fourier_estimate(a: GeneralSparseMatrix, psi, t: int, eps: float, *,
                     simulator: str = "spectral", seed: int | None = None) -> EstimateReport:
    """``<psi|A^t|psi>`` to ``eps`` as an :class:`EstimateReport` with an analytic ledger."""
    t0 = time.perf_counter()
    ledger = QueryLedger(mode="analytic")
    vals = power_overlaps(a, psi, t, eps, ledger=ledger, simulator=simulator)
    return EstimateReport(
        value=complex(vals[t]),
        std_error=0.0,
        samples=0,
        ledger=ledger,
        method="fourier",
        seed=seed,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        internal_eps=eps,
        error_bound=eps / 2,
        extra={"harmonics": harmonics_needed(t, eps / 2).n_h if t > 0 else 0},
    )
