"""Matrix elements ``v^dag A^t u`` from state overlaps, plus classical baselines.

For Hermitian ``A``::

    2 Re[v^dag A^t u] = Tr[A^t (u v^dag + v u^dag)]
    2 Im[v^dag A^t u] = Tr[A^t i(v u^dag - u v^dag)]

Both Hermitian matrices have rank at most two, so each trace is a sum of two
terms ``lambda <psi|A^t|psi>`` that the walk or Fourier estimators can handle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import fourier, walk
from .errors import NonHermitianMethodError, PreconditionError
from .ledger import DEFAULT_COST_CONSTANT, EstimateReport, QueryLedger
from .matrix import GeneralSparseMatrix, one_norm, scale_to_contraction

METHODS = ("walk-sample", "walk-lcu", "fourier", "dense", "montecarlo")
QUANTUM_METHODS = ("walk-sample", "walk-lcu", "fourier")

#: Relative size below which a decomposition eigenvalue counts as zero.
ZERO_EIG_RTOL = 1e-13
PARALLEL_RTOL = 1e-12
STOCHASTIC_TOL = 1e-12
MC_BATCH = 1 << 20


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray | None  # None only for the padding pair of a 1-dimensional space


@dataclass(frozen=True, eq=False)
class RankOneDecomposition:
    """Eigenpairs of ``u v^dag + v u^dag`` (real part) and ``i(v u^dag - u v^dag)`` (imaginary part)."""

    real_part: tuple[EigenPair, EigenPair]
    imag_part: tuple[EigenPair, EigenPair]
    norm_u: float
    norm_v: float
    parallel: bool

    def reconstruct(self, part: str = "real") -> np.ndarray:
        pairs = self.real_part if part == "real" else self.imag_part
        n = next(p.vector for p in self.real_part if p.vector is not None).shape[0]
        out = np.zeros((n, n), dtype=np.complex128)
        for p in pairs:
            if p.vector is not None:
                out += p.value * np.outer(p.vector, p.vector.conj())
        return out

    def is_zero(self, lam: float) -> bool:
        return abs(lam) <= ZERO_EIG_RTOL * self.norm_u * self.norm_v

    def terms(self) -> list[tuple[str, int, EigenPair]]:
        """Nonzero ``(part, index, pair)`` terms in the fixed order R1, R2, I1, I2."""
        out = []
        for part, pairs in (("real", self.real_part), ("imag", self.imag_part)):
            for k, p in enumerate(pairs):
                if not self.is_zero(p.value):
                    out.append((part, k, p))
        return out

    def combine(self, overlaps: dict[tuple[str, int], complex]) -> complex:
        """``v^dag A^t u`` from the overlaps ``<psi|A^t|psi>`` of the nonzero terms."""
        re = sum(0.5 * p.value * overlaps[(part, k)].real
                 for part, k, p in self.terms() if part == "real")
        im = sum(0.5 * p.value * overlaps[(part, k)].real
                 for part, k, p in self.terms() if part == "imag")
        return complex(re, im)


def _orthogonal_unit(x: np.ndarray) -> np.ndarray | None:
    n = x.shape[0]
    if n == 1:
        return None
    e = np.zeros(n, dtype=np.complex128)
    e[int(np.argmin(np.abs(x)))] = 1.0
    w = e - x * np.vdot(x, e)
    return w / np.linalg.norm(w)


def decompose(u, v) -> RankOneDecomposition:
    """Eigen-decompose the two rank-two Hermitian matrices built from ``u`` and ``v``.

    Works in an orthonormal basis of ``span{u, v}`` so the eigenproblems are at most
    2x2. When ``u`` and ``v`` are parallel the span is one-dimensional and the
    second eigenvalue of each part is zero.
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape or u.ndim != 1:
        raise PreconditionError("u and v must be vectors of equal length")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise PreconditionError("u and v must be nonzero")
    e1 = u / nu
    w = v - e1 * np.vdot(e1, v)
    parallel = np.linalg.norm(w) <= PARALLEL_RTOL * nv
    basis = e1[:, None] if parallel else np.column_stack([e1, w / np.linalg.norm(w)])
    uc = basis.conj().T @ u
    vc = basis.conj().T @ v
    m_re = np.outer(uc, vc.conj()) + np.outer(vc, uc.conj())
    m_im = 1j * (np.outer(vc, uc.conj()) - np.outer(uc, vc.conj()))

    def pairs(m: np.ndarray) -> tuple[EigenPair, EigenPair]:
        lam, vec = np.linalg.eigh(m)
        order = np.argsort(lam)[::-1]
        out = [EigenPair(float(lam[k]), basis @ vec[:, k]) for k in order]
        if parallel:
            out.append(EigenPair(0.0, _orthogonal_unit(out[0].vector)))
        return out[0], out[1]

    return RankOneDecomposition(pairs(m_re), pairs(m_im), nu, nv, bool(parallel))


def dense_power_oracle(a: GeneralSparseMatrix, u, v, t: int) -> complex:
    """Exact ``v^dag A^t u`` by ``t`` sparse mat-vecs."""
    if t < 0:
        raise PreconditionError("power must be non-negative")
    x = np.asarray(u, dtype=np.complex128)
    for _ in range(t):
        x = a.matvec(x)
    return complex(np.vdot(np.asarray(v, dtype=np.complex128), x))


def check_stochastic(a: GeneralSparseMatrix, tol: float = STOCHASTIC_TOL) -> None:
    data = np.asarray(a.data) * a.scale
    if np.any(data.imag != 0) or np.any(data.real < 0):
        raise PreconditionError("Monte Carlo needs real nonnegative entries")
    sums = np.asarray(abs(a.csc).sum(axis=0)).ravel()
    if np.any(np.abs(sums - 1.0) > tol):
        raise PreconditionError("Monte Carlo needs a column-stochastic matrix")


class _ColumnSampler:
    """Vectorized draws of ``i ~ A[:, j]`` for column-stochastic ``A``."""

    def __init__(self, a: GeneralSparseMatrix):
        csc = a.csc
        self.rows = csc.indices
        probs = np.abs(csc.data)
        cum = np.empty(len(probs))
        for j in range(a.dim):
            lo, hi = csc.indptr[j], csc.indptr[j + 1]
            c = np.cumsum(probs[lo:hi])
            c[-1] = 1.0
            cum[lo:hi] = j + c
        self.cum = cum

    def step(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        idx = np.searchsorted(self.cum, states + rng.random(len(states)), side="right")
        return self.rows[np.minimum(idx, len(self.rows) - 1)]


def montecarlo_stochastic(a: GeneralSparseMatrix, u, v, t: int, eps: float,
                          rng: np.random.Generator | None = None, *, seed: int | None = None,
                          samples: int | None = None, max_samples: int = 10 ** 8) -> EstimateReport:
    """Estimate ``v^dag A^t u`` by running Markov-chain trajectories.

    Starts are drawn from ``|u_i| / ||u||_1`` with weight ``||u||_1 u_i/|u_i|``; each
    trajectory takes ``t`` steps and pays ``conj(v_j)`` at its end. The default
    sample count ``ceil(4 ||u||_1^2 ||v||_inf^2 / eps^2)`` bounds the standard error
    by ``eps / 2``.
    """
    t0 = time.perf_counter()
    if t < 0:
        raise PreconditionError("power must be non-negative")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    check_stochastic(a)
    if rng is None:
        rng = np.random.default_rng(seed)
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    u1 = float(np.sum(np.abs(u)))
    vinf = float(np.max(np.abs(v)))
    if u1 == 0.0:
        raise PreconditionError("u must be nonzero")
    n = samples if samples is not None else math.ceil(4.0 * u1 ** 2 * vinf ** 2 / eps ** 2)
    if n > max_samples:
        raise PreconditionError(f"{n} trajectories needed; raise max_samples")
    start_p = np.abs(u) / u1
    phase = np.where(np.abs(u) > 0, u / np.where(np.abs(u) > 0, np.abs(u), 1.0), 0.0)
    sampler = _ColumnSampler(a)
    total = 0j
    total_sq = 0.0
    done = 0
    while done < n:
        b = min(MC_BATCH, n - done)
        s = rng.choice(a.dim, size=b, p=start_p)
        w = u1 * phase[s]
        for _ in range(t):
            s = sampler.step(s, rng)
        pay = w * v[s].conj()
        total += pay.sum()
        total_sq += float(np.sum(np.abs(pay) ** 2))
        done += b
    mean = total / n
    var = max(total_sq / n - abs(mean) ** 2, 0.0) * n / (n - 1) if n > 1 else 0.0
    ledger = QueryLedger(cost_constant=1)
    ledger.charge_calls(n * t * a.sparsity)
    ledger.walk_steps = n * t
    return EstimateReport(
        value=complex(mean),
        std_error=math.sqrt(var / n),
        samples=n,
        ledger=ledger,
        method="montecarlo",
        seed=seed,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        internal_eps=eps,
        error_bound=eps,
    )


def _dense_report(a, u, v, t, seed, t0) -> EstimateReport:
    ledger = QueryLedger(cost_constant=1)
    ledger.charge_calls(t * a.nnz)
    return EstimateReport(dense_power_oracle(a, u, v, t), 0.0, 0, ledger, "dense", seed,
                          (time.perf_counter() - t0) * 1e3, 0.0, 0.0)


def matrix_power_element(a: GeneralSparseMatrix, u, v, t: int, eps: float, method: str = "dense", *,
                         c_bound: float | None = None, seed: int = 0, completion_seed: int = 0,
                         lcu_mode: str = "exact", simulator: str = "spectral",
                         cost_constant: int = DEFAULT_COST_CONSTANT,
                         max_samples: int = 10 ** 8) -> EstimateReport:
    """Estimate ``v^dag A^t u`` with one of :data:`METHODS`.

    Quantum methods split ``eps`` evenly over the nonzero eigen-overlaps of
    :func:`decompose`; with ``k`` such terms each overlap is estimated to
    ``eps / (k ||u|| ||v||)`` (then divided by ``C^t`` inside the walk methods), which
    is ``eps / (4 ||u|| ||v||)`` when all four are present.
    """
    t0 = time.perf_counter()
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if t < 0:
        raise PreconditionError("power must be non-negative")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != (a.dim,) or v.shape != (a.dim,):
        raise PreconditionError("u and v must match the matrix dimension")

    if method in QUANTUM_METHODS and not a.hermitian_flag:
        raise NonHermitianMethodError(
            f"method {method!r} requires a Hermitian matrix; non-Hermitian powering is only "
            "available through the classical 'dense' and 'montecarlo' baselines"
        )
    if method == "dense":
        return _dense_report(a, u, v, t, seed, t0)
    if method == "montecarlo":
        return montecarlo_stochastic(a, u, v, t, eps, seed=seed, max_samples=max_samples)

    c = 1.0
    if method != "fourier":
        c = walk._resolve_bound(a, c_bound)
    if t == 0:
        ledger = QueryLedger(cost_constant=cost_constant)
        return EstimateReport(complex(np.vdot(v, u)), 0.0, 0, ledger, method, seed,
                              (time.perf_counter() - t0) * 1e3, 0.0, 0.0, c)

    dec = decompose(u, v)
    terms = dec.terms()
    per_eps = eps / (max(len(terms), 1) * dec.norm_u * dec.norm_v)
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]
    slot = {("real", 0): 0, ("real", 1): 1, ("imag", 0): 2, ("imag", 1): 3}

    ops = None
    if method in ("walk-sample", "walk-lcu"):
        scaled = scale_to_contraction(a, c) if c != 1.0 else a
        ops = walk.build_operators(scaled, completion_seed)

    ledger = QueryLedger(cost_constant=cost_constant, mode="analytic" if method == "fourier" else "counted")
    overlaps: dict[tuple[str, int], complex] = {}
    var = 0.0
    samples = 0
    internal = per_eps / c ** t
    for part, k, pair in terms:
        psi = pair.vector
        rng = rngs[slot[(part, k)]]
        if method == "walk-sample":
            rep = walk.sampling_estimate(a, psi, t, per_eps, c, rng, ops=ops,
                                         cost_constant=cost_constant, max_samples=max_samples)
        elif method == "walk-lcu":
            rep = walk.lcu_estimate(a, psi, t, per_eps, c, mode=lcu_mode, rng=rng, ops=ops,
                                    completion_seed=completion_seed, cost_constant=cost_constant,
                                    max_samples=max_samples)
        else:
            rep = fourier.fourier_estimate(a, psi, t, min(per_eps, 1.0), simulator=simulator)
            internal = min(per_eps, 1.0)
        overlaps[(part, k)] = rep.value
        var += (0.5 * pair.value * rep.std_error) ** 2
        samples += rep.samples
        ledger = ledger + rep.ledger
    ledger.cost_constant = cost_constant

    return EstimateReport(
        value=dec.combine(overlaps),
        std_error=math.sqrt(var),
        samples=samples,
        ledger=ledger,
        method=method,
        seed=seed,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        internal_eps=internal,
        error_bound=eps,
        c_bound=c,
        extra={"nonzero_terms": len(terms)},
    )
