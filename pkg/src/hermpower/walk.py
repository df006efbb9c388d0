"""Statevector simulation of the quantum-walk matrix-powering algorithms.

The walk lives on ``reg1 (N+2 levels) x reg2 (N+2 levels) x coin (2 levels)``.
Matrix row ``k`` (0-based) is encoded as register value ``k+1``; value 0 of the
second register is the "home" state and value ``N+1`` absorbs the 1-norm slack.
Register-1 value 0 is padding. Flat index of ``|i, j, b>`` is ``(i*(N+2) + j)*2 + b``.

``V`` maps ``|i,0,0>`` to ``sum_k sqrt|A_ki| e^{i phi_ki/2} |i,k,1> + slack |i,N+1,1>``,
``S`` swaps the two registers on the coin-1 sector (with ``sign(A_ii)`` on the
diagonal) and ``W = (I x I x Z) V^dag S V``. On the home sector ``m`` steps of ``W``
act as ``T_m(A)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import chebyshev
from .errors import NonHermitianMethodError, PreconditionError
from .ledger import DEFAULT_COST_CONSTANT, EstimateReport, QueryLedger
from .matrix import GeneralSparseMatrix, one_norm, scale_to_contraction

NORM_TOL = 1e-8
ONE_NORM_TOL = 1e-12

#: Hadamard-test outcomes in the order (coin 0, +), (coin 0, -), (coin 1, +), (coin 1, -).
OUTCOME_VALUES = np.array([1, -1, 0, 0])


@dataclass(frozen=True)
class WalkSpace:
    n: int

    @property
    def levels(self) -> int:
        return self.n + 2

    @property
    def dim(self) -> int:
        return 2 * self.levels ** 2

    def index(self, i: int, j: int, b: int) -> int:
        L = self.levels
        if not (0 <= i < L and 0 <= j < L and b in (0, 1)):
            raise IndexError(f"basis label ({i}, {j}, {b}) out of range")
        return (i * L + j) * 2 + b

    def unindex(self, k: int) -> tuple[int, int, int]:
        if not 0 <= k < self.dim:
            raise IndexError(k)
        ij, b = divmod(k, 2)
        i, j = divmod(ij, self.levels)
        return i, j, b

    @property
    def home(self) -> np.ndarray:
        """Flat indices of ``|k+1, 0, 0>`` for matrix rows ``k = 0..N-1``."""
        return (np.arange(1, self.n + 1) * self.levels) * 2

    def embed(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=np.complex128)
        if psi.shape != (self.n,):
            raise PreconditionError(f"state of shape {psi.shape} does not match N={self.n}")
        out = np.zeros(self.dim, dtype=np.complex128)
        out[self.home] = psi
        return out

    def project(self, state) -> np.ndarray:
        return np.asarray(state)[self.home]

    def coin_zero(self, state) -> np.ndarray:
        out = np.array(state, dtype=np.complex128, copy=True)
        out[1::2] = 0.0
        return out


@dataclass(frozen=True, eq=False)
class WalkOperators:
    space: WalkSpace
    V: np.ndarray
    S: np.ndarray
    W: np.ndarray
    completion_seed: int
    sparsity: int

    def unitarity_residuals(self) -> dict[str, float]:
        eye = np.eye(self.space.dim)
        return {
            name: float(np.max(np.abs(m.conj().T @ m - eye)))
            for name, m in (("V", self.V), ("S", self.S), ("W", self.W))
        }

    def walk_power(self, state, m: int) -> np.ndarray:
        x = np.asarray(state, dtype=np.complex128)
        for _ in range(m):
            x = self.W @ x
        return x


def _walk_phase(a: GeneralSparseMatrix, k: int, col: int, z: complex) -> float:
    # Phases antisymmetric in (k, col) and read from the stored lower-triangle entry,
    # so that conj(amp(col, k)) * amp(k, col) reproduces A[k, col] including negative
    # reals. Conjugating instead would flip the sign of a zero imaginary part and
    # turn +pi into -pi on one side only.
    if k >= col:
        return math.atan2(z.imag, z.real)
    w = a.entry(col, k)
    return -math.atan2(w.imag, w.real)


def _complete_unitary(fixed: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of the complement of the orthonormal columns ``fixed``."""
    d, k = fixed.shape
    g = rng.standard_normal((d, d - k)) + 1j * rng.standard_normal((d, d - k))
    for _ in range(2):
        g -= fixed @ (fixed.conj().T @ g)
    q, _ = np.linalg.qr(g)
    return q


def build_operators(a: GeneralSparseMatrix, completion_seed: int = 0) -> WalkOperators:
    """Assemble dense ``V``, ``S`` and ``W`` for a Hermitian matrix with ``||A||_1 <= 1``.

    Each block ``V_i`` sends ``|0,0>`` to the column state of column ``i``, fixes
    ``|j,0>`` for ``j >= 1`` and sends the coin-1 basis to a random orthonormal
    completion drawn from ``completion_seed``; the home-sector action of ``W`` does
    not depend on that completion.
    """
    if not a.hermitian_flag:
        raise NonHermitianMethodError("walk operators require a Hermitian matrix")
    n1 = one_norm(a)
    if n1 > 1.0 + ONE_NORM_TOL:
        raise PreconditionError(f"walk needs ||A||_1 <= 1, got {n1}; rescale first")
    space = WalkSpace(a.dim)
    n, L, d = a.dim, space.levels, space.dim
    block = 2 * L
    rng = np.random.default_rng(completion_seed)

    V = np.eye(d, dtype=np.complex128)
    e = np.eye(block, dtype=np.complex128)
    for c in range(n):
        rows, vals = a.column(c)
        psi = np.zeros(block, dtype=np.complex128)
        for k, z in zip(rows, vals):
            z = complex(z)
            psi[(k + 1) * 2 + 1] = math.sqrt(abs(z)) * np.exp(0.5j * _walk_phase(a, int(k), c, z))
        slack = 1.0 - float(np.sum(np.abs(vals)))
        psi[(n + 1) * 2 + 1] = math.sqrt(max(slack, 0.0))
        psi /= np.linalg.norm(psi)
        fixed = np.column_stack([psi] + [e[:, j * 2] for j in range(1, L)])
        comp = _complete_unitary(fixed, rng)
        vi = np.zeros((block, block), dtype=np.complex128)
        vi[:, 0] = psi
        for j in range(1, L):
            vi[:, j * 2] = e[:, j * 2]
        for j in range(L):
            vi[:, j * 2 + 1] = comp[:, j]
        r = (c + 1) * block
        V[r:r + block, r:r + block] = vi

    diag_sign = np.ones(L)
    for k in range(n):
        if a.entry(k, k).real < 0:
            diag_sign[k + 1] = -1.0
    S = np.zeros((d, d))
    for i in range(L):
        for j in range(L):
            S[space.index(i, j, 0), space.index(i, j, 0)] = 1.0
            if i != j:
                S[space.index(j, i, 1), space.index(i, j, 1)] = 1.0
            else:
                S[space.index(i, i, 1), space.index(i, i, 1)] = diag_sign[i]

    z = np.tile([1.0, -1.0], d // 2)
    W = z[:, None] * (V.conj().T @ (S @ V))
    return WalkOperators(space, V, S, W, completion_seed, a.sparsity)


def walk_identity_residual(ops: WalkOperators, a: GeneralSparseMatrix, psi, m: int) -> float:
    """``|| P_{coin=0} W^m |psi,0,0> - T_m(A) psi (x) |0,0> ||``."""
    space = ops.space
    state = ops.walk_power(space.embed(psi), m)
    target = space.embed(chebyshev.apply_chebyshev(a, psi, m))
    return float(np.linalg.norm(space.coin_zero(state) - target))


def _check_normalized(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > NORM_TOL:
        raise PreconditionError(f"state must be normalized, got norm {nrm}")
    return psi


def _outcome_probabilities(space: WalkSpace, state: np.ndarray) -> np.ndarray:
    """Measure coin and control (after a Hadamard on control) of a ``(dim, 2)`` state."""
    plus = (state[:, 0] + state[:, 1]) / math.sqrt(2)
    minus = (state[:, 0] - state[:, 1]) / math.sqrt(2)
    p = np.empty(4)
    p[0] = np.sum(np.abs(plus[0::2]) ** 2)
    p[1] = np.sum(np.abs(minus[0::2]) ** 2)
    p[2] = np.sum(np.abs(plus[1::2]) ** 2)
    p[3] = np.sum(np.abs(minus[1::2]) ** 2)
    return p


def _sample_outcomes(table: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(table[rows], axis=1)
    r = rng.random(len(rows))
    idx = np.minimum((cum <= r[:, None]).sum(axis=1), 3)
    return OUTCOME_VALUES[idx]


class HadamardTest:
    """Hadamard test on ``(W^c)^m |psi,0,0,+>``, with statevectors cached by ``m``."""

    def __init__(self, ops: WalkOperators, psi):
        self.ops = ops
        self.psi = _check_normalized(psi)
        start = ops.space.embed(self.psi)
        self._states = [np.column_stack([start, start]) / math.sqrt(2)]
        self._probs: dict[int, np.ndarray] = {}

    def statevector(self, m: int) -> np.ndarray:
        """Walk-register x control state after ``m`` controlled walk steps, shape ``(dim, 2)``."""
        while len(self._states) <= m:
            prev = self._states[-1]
            nxt = prev.copy()
            nxt[:, 1] = self.ops.W @ prev[:, 1]
            self._states.append(nxt)
        return self._states[m]

    def probabilities(self, m: int) -> np.ndarray:
        if m not in self._probs:
            self._probs[m] = _outcome_probabilities(self.ops.space, self.statevector(m))
        return self._probs[m]

    def expectation(self, m: int) -> float:
        p = self.probabilities(m)
        return float(p[0] - p[1])

    def sample(self, m: int, rng: np.random.Generator, ledger: QueryLedger | None = None) -> int:
        out = int(_sample_outcomes(self.probabilities(m)[None, :], np.zeros(1, dtype=int), rng)[0])
        if ledger is not None:
            ledger.charge_walk_steps(self.ops.sparsity, m)
        return out

    def sample_orders(self, ms: np.ndarray, rng: np.random.Generator,
                      ledger: QueryLedger | None = None) -> np.ndarray:
        """One outcome per entry of ``ms``, each drawn with its own walk length."""
        ms = np.asarray(ms, dtype=int)
        uniq, inv = np.unique(ms, return_inverse=True)
        table = np.array([self.probabilities(int(m)) for m in uniq]).reshape(len(uniq), 4)
        out = _sample_outcomes(table, inv, rng)
        if ledger is not None:
            ledger.charge_walk_steps(self.ops.sparsity, int(ms.sum()))
        return out


def hadamard_sample(ops: WalkOperators, psi, m: int, rng: np.random.Generator,
                    ledger: QueryLedger | None = None) -> int:
    """Draw one ``X_m`` in {-1, 0, +1} with mean ``<psi|T_m(A)|psi>``."""
    return HadamardTest(ops, psi).sample(m, rng, ledger)


def _resolve_bound(a: GeneralSparseMatrix, c: float | None) -> float:
    n1 = one_norm(a)
    if c is None:
        return n1 if n1 > 0 else 1.0
    if not c > 0:
        raise PreconditionError(f"norm bound C must be positive, got {c}")
    if n1 > c * (1 + ONE_NORM_TOL):
        raise PreconditionError(f"||A||_1 = {n1} exceeds the bound C = {c}")
    return float(c)


def _prepare(a: GeneralSparseMatrix, psi, t: int, eps: float, c: float | None):
    if not a.hermitian_flag:
        raise NonHermitianMethodError("quantum-walk methods require a Hermitian matrix")
    if t < 0:
        raise PreconditionError("power t must be non-negative")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    psi = _check_normalized(psi)
    c = _resolve_bound(a, c)
    return psi, c, scale_to_contraction(a, c) if c != 1.0 else a


def sampling_estimate(a: GeneralSparseMatrix, psi, t: int, eps: float, c: float | None = None,
                      rng: np.random.Generator | None = None, *, seed: int | None = None,
                      completion_seed: int = 0, ops: WalkOperators | None = None,
                      cost_constant: int = DEFAULT_COST_CONSTANT,
                      max_samples: int = 10 ** 8) -> EstimateReport:
    """Estimate ``<psi|A^t|psi>`` by sampling Chebyshev orders and Hadamard outcomes.

    The scaled overlap ``<psi|(A/C)^t|psi>`` is estimated to ``eps / C^t`` with
    ``ceil(4 / (eps/C^t)^2)`` draws; each draw samples ``m ~ p_m`` and runs ``m``
    controlled walk steps. The value and standard error are rescaled by ``C^t``.
    """
    t0 = time.perf_counter()
    psi, c, scaled = _prepare(a, psi, t, eps, c)
    if rng is None:
        rng = np.random.default_rng(seed)
    ct = c ** t
    eps_int = eps / ct
    n = math.ceil(4.0 / eps_int ** 2)
    if n > max_samples:
        raise PreconditionError(f"{n} samples needed (C^t = {ct:.3g}); raise max_samples or tighten C")
    if ops is None:
        ops = build_operators(scaled, completion_seed)
    ledger = QueryLedger(cost_constant=cost_constant)
    test = HadamardTest(ops, psi)
    ms = chebyshev.sample_order(chebyshev.weights(t), rng, size=n)
    xs = test.sample_orders(ms, rng, ledger)
    mean = float(xs.mean())
    se = float(xs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateReport(
        value=complex(mean * ct),
        std_error=se * ct,
        samples=n,
        ledger=ledger,
        method="walk-sample",
        seed=seed,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        internal_eps=eps_int,
        error_bound=eps,
        c_bound=c,
        extra={"mean_order": float(ms.mean()), "expected_order": chebyshev.expected_order(t)},
    )


# linear combination of walk powers


@dataclass(frozen=True, eq=False)
class LCUOperators:
    """Prepare / select pair implementing ``sum_{m<=tau} p_m W^m`` on a flagged block.

    The auxiliary register is ``|m> (tau+1 levels) x |flag>`` with flat index
    ``2*m + flag``. ``VP`` loads ``sqrt(p_m)`` on ``|m, 0>`` and the leftover mass on
    ``|0, 1>``. The select operator applies ``W^m`` on ``|m, 0>`` and flips the walk
    coin on the flag-1 branch, so the leftover mass never returns to the home
    sector and the block is exactly the truncated sum.
    """

    ops: WalkOperators
    probs: np.ndarray
    VP: np.ndarray
    tau: int
    seed: int = 0
    _coin_flip: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_coin_flip", np.arange(self.ops.space.dim) ^ 1)

    @property
    def aux_dim(self) -> int:
        return 2 * (self.tau + 1)

    def apply_prepare(self, state: np.ndarray, dagger: bool = False) -> np.ndarray:
        """Apply ``VP`` (or its adjoint) to a ``(walk, tau+1, 2, ...)`` array."""
        shp = state.shape
        flat = state.reshape(shp[0], self.aux_dim, -1)
        m = self.VP.conj().T if dagger else self.VP
        out = np.einsum("ab,wbr->war", m, flat)
        return out.reshape(shp)

    def apply_select(self, state: np.ndarray) -> np.ndarray:
        out = np.empty_like(state)
        x = state[:, :, 0].copy()
        for k in range(1, self.tau + 1):
            x[:, k:] = np.tensordot(self.ops.W, x[:, k:], axes=1)
        out[:, :, 0] = x
        out[:, :, 1] = state[self._coin_flip, :, 1]
        return out

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.apply_prepare(self.apply_select(self.apply_prepare(state)), dagger=True)

    def initial(self, psi) -> np.ndarray:
        st = np.zeros((self.ops.space.dim, self.tau + 1, 2), dtype=np.complex128)
        st[:, 0, 0] = self.ops.space.embed(psi)
        return st

    def block_action(self, psi) -> np.ndarray:
        """Coin-0 part of ``<aux 0,0| VP^dag W_tau VP |aux 0,0>`` applied to ``|psi,0,0>``."""
        out = self.apply(self.initial(psi))[:, 0, 0]
        return self.ops.space.coin_zero(out)

    def block_residual(self, a: GeneralSparseMatrix, psi) -> float:
        target = chebyshev.chebyshev_series(a, psi, self.probs)
        return float(np.linalg.norm(self.block_action(psi) - self.ops.space.embed(target)))

    # dense forms, for auditing small instances

    def dense_prepare(self) -> np.ndarray:
        return np.kron(np.eye(self.ops.space.dim), self.VP)

    def dense_select(self) -> np.ndarray:
        d = self.ops.space.dim
        total = np.zeros((d * self.aux_dim, d * self.aux_dim), dtype=np.complex128)
        wm = np.eye(d, dtype=np.complex128)
        for m in range(self.tau + 1):
            sel = np.zeros((self.aux_dim, self.aux_dim))
            sel[2 * m, 2 * m] = 1.0
            total += np.kron(wm, sel)
            wm = self.ops.W @ wm
        flip = np.eye(d)[self._coin_flip]
        flag = np.kron(np.eye(self.tau + 1), np.diag([0.0, 1.0]))
        total += np.kron(flip, flag)
        return total

    def dense(self) -> np.ndarray:
        p = self.dense_prepare()
        return p.conj().T @ self.dense_select() @ p


def build_lcu_operators(ops: WalkOperators, w: chebyshev.ChebyshevWeights, tau: int,
                        seed: int = 0) -> LCUOperators:
    if tau < 0:
        raise PreconditionError("tau must be non-negative")
    probs = w.truncated(tau)
    tau = len(probs) - 1
    aux = 2 * (tau + 1)
    col = np.zeros(aux, dtype=np.complex128)
    col[0::2] = np.sqrt(probs)
    col[1] = math.sqrt(max(0.0, 1.0 - float(probs.sum())))
    col /= np.linalg.norm(col)
    comp = _complete_unitary(col[:, None], np.random.default_rng(seed))
    vp = np.column_stack([col, comp])
    return LCUOperators(ops, probs, vp, tau, seed)


def lcu_hadamard_probabilities(lcu: LCUOperators, psi) -> np.ndarray:
    """Outcome probabilities of (coin, control) for ``H . ctrl-U . H`` on ``|psi,0,0>|0..0>|0>``."""
    start = lcu.initial(psi)
    branch = lcu.apply(start)
    state = np.stack([start, branch], axis=-1) / math.sqrt(2)
    flat = state.reshape(lcu.ops.space.dim, -1, 2)
    plus = (flat[..., 0] + flat[..., 1]) / math.sqrt(2)
    minus = (flat[..., 0] - flat[..., 1]) / math.sqrt(2)
    p = np.empty(4)
    p[0] = np.sum(np.abs(plus[0::2]) ** 2)
    p[1] = np.sum(np.abs(minus[0::2]) ** 2)
    p[2] = np.sum(np.abs(plus[1::2]) ** 2)
    p[3] = np.sum(np.abs(minus[1::2]) ** 2)
    return p


def analytic_lcu_calls(sparsity: int, t: int, eps: float) -> int:
    """Amplitude-estimation budget ``D sqrt(t) / eps`` with unit constant."""
    if t == 0:
        return 0
    return math.ceil(sparsity * math.sqrt(t) / eps)


def lcu_estimate(a: GeneralSparseMatrix, psi, t: int, eps: float, c: float | None = None,
                 mode: str = "exact", rng: np.random.Generator | None = None, *,
                 seed: int | None = None, completion_seed: int = 0,
                 ops: WalkOperators | None = None,
                 cost_constant: int = DEFAULT_COST_CONSTANT,
                 max_samples: int = 10 ** 8) -> EstimateReport:
    """Estimate ``<psi|A^t|psi>`` with the Hadamard test around the LCU operator.

    Half of the scaled budget ``eps / C^t`` goes to Chebyshev truncation and half to
    estimation. ``mode="exact"`` reads ``<|0><0|_coin (x) Z_control>`` from the
    statevector and books the amplitude-estimation query count analytically;
    ``mode="sampled"`` draws ``ceil(4/(eps_int/2)^2)`` outcomes and counts ``tau``
    walk steps per draw.
    """
    if mode not in ("exact", "sampled"):
        raise PreconditionError(f"unknown mode {mode!r}")
    t0 = time.perf_counter()
    psi, c, scaled = _prepare(a, psi, t, eps, c)
    ct = c ** t
    eps_int = eps / ct
    ledger = QueryLedger(cost_constant=cost_constant, mode="analytic" if mode == "exact" else "counted")
    if t == 0:
        return EstimateReport(1.0 + 0j, 0.0, 0, ledger, "walk-lcu", seed,
                              (time.perf_counter() - t0) * 1e3, eps_int, 0.0, c,
                              extra={"tau": 0, "mode": mode})
    plan = chebyshev.truncation_plan(t, eps_int / 2)
    if ops is None:
        ops = build_operators(scaled, completion_seed)
    lcu = build_lcu_operators(ops, chebyshev.weights(t), plan.cutoff, seed=completion_seed)
    probs = lcu_hadamard_probabilities(lcu, psi)
    if mode == "exact":
        value = float(probs[0] - probs[1])
        se, n = 0.0, 0
        ledger.charge_calls(analytic_lcu_calls(ops.sparsity, t, eps_int))
        bound = eps_int / 2
    else:
        if rng is None:
            rng = np.random.default_rng(seed)
        n = math.ceil(4.0 / (eps_int / 2) ** 2)
        if n > max_samples:
            raise PreconditionError(f"{n} samples needed; raise max_samples")
        xs = _sample_outcomes(probs[None, :], np.zeros(n, dtype=int), rng)
        value = float(xs.mean())
        se = float(xs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        ledger.charge_walk_steps(ops.sparsity, lcu.tau * n)
        bound = eps_int
    return EstimateReport(
        value=complex(value * ct),
        std_error=se * ct,
        samples=n,
        ledger=ledger,
        method="walk-lcu",
        seed=seed,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        internal_eps=eps_int,
        error_bound=bound * ct,
        c_bound=c,
        extra={"tau": lcu.tau, "mode": mode},
    )
