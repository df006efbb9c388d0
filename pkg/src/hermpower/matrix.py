"""Sparse complex matrices, validation, norm bounds and test-instance generators.

Matrices are stored in compressed sparse row layout with 0-based indices and are
immutable once built. :class:`SparseHermitianMatrix` additionally guarantees that
every stored entry ``(i, j, z)`` has its exact conjugate partner ``(j, i, conj(z))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import HermiticityError, PreconditionError, StructuralError

#: Entries smaller than this in magnitude are treated as explicit zeros and dropped.
ZERO_CUTOFF = 1e-300

POWER_ITERATIONS = 200
POWER_RTOL = 1e-10
STABILITY_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GeneralSparseMatrix:
    """Square complex matrix in CSR layout with no symmetry constraint.

    ``scale`` records a factor the stored entries were divided by, so the matrix
    the caller cares about is ``scale * self`` (see :func:`scale_to_contraction`).
    """

    dim: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    scale: float = 1.0

    def __post_init__(self) -> None:
        if int(self.dim) < 1:
            raise StructuralError(f"dimension must be positive, got {self.dim}")
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        data = np.asarray(self.data, dtype=np.complex128)
        n = int(self.dim)
        if indptr.shape != (n + 1,) or indptr[0] != 0:
            raise StructuralError("indptr must have length dim+1 and start at 0")
        if np.any(np.diff(indptr) < 0):
            raise StructuralError("indptr must be non-decreasing")
        if indices.shape != data.shape or indices.ndim != 1 or indptr[-1] != len(indices):
            raise StructuralError("indices/data lengths disagree with indptr")
        if len(indices) and (indices.min() < 0 or indices.max() >= n):
            raise StructuralError("column index out of range")
        if not np.all(np.isfinite(data)):
            raise StructuralError("matrix entries must be finite")
        for r in range(n):
            cols = indices[indptr[r]:indptr[r + 1]]
            if len(cols) > 1 and np.any(np.diff(cols) <= 0):
                raise StructuralError(f"row {r}: column indices must be strictly increasing")
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "indptr", _readonly(indptr))
        object.__setattr__(self, "indices", _readonly(indices))
        object.__setattr__(self, "data", _readonly(data))
        object.__setattr__(self, "scale", float(self.scale))

    # construction

    @classmethod
    def from_triplets(cls, dim: int, rows: Iterable[int], cols: Iterable[int],
                      values: Iterable[complex], scale: float = 1.0):
        """Build from coordinate triplets; duplicate coordinates are a structural error."""
        rows = np.asarray(list(rows), dtype=np.int64)
        cols = np.asarray(list(cols), dtype=np.int64)
        values = np.asarray(list(values), dtype=np.complex128)
        if not (rows.shape == cols.shape == values.shape):
            raise StructuralError("triplet arrays must have equal length")
        if len(rows) and (rows.min() < 0 or rows.max() >= dim or cols.min() < 0 or cols.max() >= dim):
            raise StructuralError("triplet index out of range")
        keep = ~(np.abs(values) < ZERO_CUTOFF)  # NaN survives to the finiteness check
        rows, cols, values = rows[keep], cols[keep], values[keep]
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if len(rows) > 1:
            dup = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if np.any(dup):
                k = int(np.argmax(dup))
                raise StructuralError(f"duplicate entry at ({rows[k]}, {cols[k]})")
        indptr = np.zeros(dim + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return cls(dim, np.cumsum(indptr), cols, values, scale)

    @classmethod
    def from_dense(cls, m, scale: float = 1.0):
        m = np.asarray(m, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructuralError("dense input must be a square 2-D array")
        if not np.all(np.isfinite(m)):
            raise StructuralError("matrix entries must be finite")
        r, c = np.nonzero(np.abs(m) >= ZERO_CUTOFF)
        return cls.from_triplets(m.shape[0], r, c, m[r, c], scale)

    @classmethod
    def from_scipy(cls, m, scale: float = 1.0):
        coo = sp.coo_matrix(m)
        if coo.shape[0] != coo.shape[1]:
            raise StructuralError("matrix must be square")
        return cls.from_triplets(coo.shape[0], coo.row, coo.col, coo.data, scale)

    # views

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.dim, self.dim))

    @cached_property
    def csc(self) -> sp.csc_matrix:
        m = self.csr.tocsc()
        m.sort_indices()
        return m

    @property
    def nnz(self) -> int:
        return len(self.data)

    @property
    def rows(self) -> list[list[tuple[int, complex]]]:
        """Per-row lists of ``(column, value)`` pairs."""
        return [
            [(int(j), complex(z)) for j, z in zip(self.indices[a:b], self.data[a:b])]
            for a, b in zip(self.indptr[:-1], self.indptr[1:])
        ]

    @cached_property
    def sparsity(self) -> int:
        """D: the largest number of nonzeros in any row or column."""
        if self.nnz == 0:
            return 0
        row_counts = np.diff(self.indptr)
        col_counts = np.bincount(self.indices, minlength=self.dim)
        return int(max(row_counts.max(), col_counts.max()))

    @property
    def hermitian_flag(self) -> bool:
        return False

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Row indices and values of the nonzeros in column ``j``."""
        c = self.csc
        a, b = c.indptr[j], c.indptr[j + 1]
        return c.indices[a:b], c.data[a:b]

    def entry(self, i: int, j: int) -> complex:
        a, b = self.indptr[i], self.indptr[i + 1]
        k = np.searchsorted(self.indices[a:b], j)
        if k < b - a and self.indices[a + k] == j:
            return complex(self.data[a + k])
        return 0j

    def matvec(self, x) -> np.ndarray:
        return self.csr @ np.asarray(x, dtype=np.complex128)

    def rmatvec(self, x) -> np.ndarray:
        """Apply the conjugate transpose."""
        return self.csr.conj().T @ np.asarray(x, dtype=np.complex128)

    def todense(self) -> np.ndarray:
        return self.csr.toarray()

    def scaled(self, factor: float):
        """Return ``self / factor`` with the factor folded into ``scale``."""
        return type(self)(self.dim, self.indptr, self.indices, self.data / factor, self.scale * factor)

    def is_hermitian(self) -> bool:
        """Exact conjugate-pair test on the stored pattern and values."""
        n = self.dim
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.indptr))
        cols = self.indices
        fwd = rows * n + cols
        bwd = cols * n + rows
        order = np.argsort(bwd, kind="stable")
        if not np.array_equal(fwd, bwd[order]):
            return False
        return bool(np.array_equal(self.data, np.conj(self.data[order])))

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for a in (np.int64(self.dim), self.indptr, self.indices, self.data, np.float64(self.scale)):
            h.update(np.asarray(a).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class SparseHermitianMatrix(GeneralSparseMatrix):
    """D-sparse Hermitian matrix; Hermiticity is checked exactly on construction."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.is_hermitian():
            raise HermiticityError("matrix has an entry without its exact conjugate partner")

    @property
    def hermitian_flag(self) -> bool:
        return True

    @classmethod
    def from_general(cls, m: GeneralSparseMatrix) -> "SparseHermitianMatrix":
        return cls(m.dim, m.indptr, m.indices, m.data, m.scale)


# norms and validation


@dataclass(frozen=True)
class NormBounds:
    one_norm: float
    two_norm_upper: float
    two_norm_lower: float
    two_norm_estimate: float


@dataclass(frozen=True)
class ValidationReport:
    dim: int
    nnz: int
    sparsity: int
    hermitian: bool
    norms: NormBounds
    stable: bool
    iterations: int

    @property
    def one_norm(self) -> float:
        return self.norms.one_norm


def one_norm(a: GeneralSparseMatrix) -> float:
    """Maximum absolute column sum."""
    if a.nnz == 0:
        return 0.0
    return float(np.max(np.asarray(abs(a.csr).sum(axis=0)).ravel()))


def inf_norm(a: GeneralSparseMatrix) -> float:
    """Maximum absolute row sum."""
    if a.nnz == 0:
        return 0.0
    return float(np.max(np.asarray(abs(a.csr).sum(axis=1)).ravel()))


def two_norm_bounds(a: GeneralSparseMatrix, iterations: int = POWER_ITERATIONS,
                    rtol: float = POWER_RTOL) -> tuple[NormBounds, int]:
    """Bracket the spectral norm by power iteration on ``A^H A``.

    The lower bound ``||A x||`` for the final unit iterate is rigorous. The upper bound
    applies the residual inclusion theorem to ``A^H A`` and is rigorous once the iterate
    has settled in the dominant eigenspace; it is clipped to ``sqrt(||A||_1 ||A||_inf)``,
    which always holds.
    """
    n1 = one_norm(a)
    hard_upper = math.sqrt(n1 * inf_norm(a))
    if a.nnz == 0:
        return NormBounds(n1, 0.0, 0.0, 0.0), 0
    rng = np.random.default_rng(0)
    x = rng.standard_normal(a.dim) + 1j * rng.standard_normal(a.dim)
    x /= np.linalg.norm(x)
    mu = 0.0
    it = 0
    for it in range(1, iterations + 1):
        y = a.rmatvec(a.matvec(x))
        mu_new = float(np.vdot(x, y).real)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            mu = 0.0
            break
        converged = abs(mu_new - mu) <= rtol * abs(mu_new)
        mu = mu_new
        x = y / ny
        if converged:
            break
    ax = a.matvec(x)
    lower = float(np.linalg.norm(ax))
    y = a.rmatvec(ax)
    mu = lower * lower
    resid = float(np.linalg.norm(y - mu * x))
    upper = min(math.sqrt(mu + resid), hard_upper)
    upper = max(upper, lower)
    return NormBounds(n1, upper, lower, lower), it


def validate(a: GeneralSparseMatrix, require_hermitian: bool = True,
             tol: float = STABILITY_TOL) -> ValidationReport:
    """Check Hermiticity and stability and report norm bounds.

    Raises
    ------
    HermiticityError
        If ``require_hermitian`` is set and the matrix is not exactly Hermitian.
    """
    herm = a.is_hermitian()
    if require_hermitian and not herm:
        raise HermiticityError("matrix is not Hermitian")
    norms, it = two_norm_bounds(a)
    return ValidationReport(
        dim=a.dim,
        nnz=a.nnz,
        sparsity=a.sparsity,
        hermitian=herm,
        norms=norms,
        stable=norms.two_norm_upper <= 1.0 + tol,
        iterations=it,
    )


def scale_to_contraction(a: GeneralSparseMatrix, c: float):
    """Divide ``a`` by a bound ``c >= ||a||_1`` so the result has unit-bounded 1-norm."""
    if not c > 0:
        raise PreconditionError(f"scale bound must be positive, got {c}")
    n1 = one_norm(a)
    if c < n1 * (1 - 1e-12):
        raise PreconditionError(f"scale bound {c} is below ||A||_1 = {n1}")
    if c == 1.0:
        return a
    return a.scaled(c)


# generators


def gen_random_stable(n: int, d: int, spectral_radius: float, seed: int) -> SparseHermitianMatrix:
    """Random d-sparse Hermitian matrix rescaled to the given spectral radius.

    Off-diagonal entries are complex Gaussian, diagonal entries real Gaussian (so
    negative diagonals occur). Deterministic in ``seed``.
    """
    if n < 1 or d < 1:
        raise PreconditionError("n and d must be positive")
    if d > n:
        raise PreconditionError(f"sparsity d={d} exceeds dimension n={n}")
    if not 0 < spectral_radius < 1:
        raise PreconditionError("spectral_radius must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=int)
    entries: dict[tuple[int, int], complex] = {}
    for i in rng.permutation(n):
        for j in rng.permutation(n):
            if deg[i] >= d:
                break
            if (i, j) in entries or deg[j] >= d:
                continue
            if i == j:
                entries[(i, i)] = complex(rng.standard_normal())
                deg[i] += 1
            else:
                z = complex(rng.standard_normal(), rng.standard_normal())
                entries[(i, j)] = z
                entries[(j, i)] = z.conjugate()
                deg[i] += 1
                deg[j] += 1
    dense = np.zeros((n, n), dtype=np.complex128)
    for (i, j), z in entries.items():
        dense[i, j] = z
    rho = float(np.max(np.abs(np.linalg.eigvalsh(dense))))
    if rho == 0.0:
        dense = np.diag(rng.standard_normal(n)).astype(np.complex128)
        rho = float(np.max(np.abs(np.diag(dense))))
    dense *= spectral_radius / rho
    return SparseHermitianMatrix.from_dense(dense)


def gen_cycle_walk(n: int) -> SparseHermitianMatrix:
    """Symmetric stochastic matrix of the lazy-free random walk on an n-cycle."""
    if n < 1:
        raise PreconditionError("n must be positive")
    dense = np.zeros((n, n))
    for i in range(n):
        dense[(i + 1) % n, i] += 0.5
        dense[(i - 1) % n, i] += 0.5
    return SparseHermitianMatrix.from_dense(dense)


def _check_bits(bits: Sequence[int]) -> list[int]:
    bits = [int(b) for b in bits]
    if not bits:
        raise PreconditionError("bit string must be non-empty")
    if any(b not in (0, 1) for b in bits):
        raise PreconditionError("bits must be 0 or 1")
    return bits


def _site(i: int, sigma: int) -> int:
    return 2 * i + sigma


def gen_parity_chain(bits: Sequence[int]) -> tuple[GeneralSparseMatrix, np.ndarray, np.ndarray]:
    """Deterministic chain whose N-th power encodes the parity of ``bits``.

    States are ``(i, sigma)`` with position ``i`` in ``0..N-1`` (flat index ``2i+sigma``).
    Stepping from position ``i`` to ``i+1 (mod N)`` flips ``sigma`` iff ``bits[i]`` is 1,
    so after N steps the walker is back at position 0 with ``sigma`` equal to the parity.
    With ``u = e_(0,0)`` and ``v = e_(0,0) - e_(0,1)``, ``v^T A^N u = (-1)^parity``.
    """
    bits = _check_bits(bits)
    n = len(bits)
    rows, cols = [], []
    for i in range(n):
        for s in (0, 1):
            rows.append(_site((i + 1) % n, s ^ bits[i]))
            cols.append(_site(i, s))
    a = GeneralSparseMatrix.from_triplets(2 * n, rows, cols, np.ones(len(rows)))
    u = np.zeros(2 * n, dtype=np.complex128)
    u[_site(0, 0)] = 1.0
    v = np.zeros(2 * n, dtype=np.complex128)
    v[_site(0, 0)] = 1.0
    v[_site(0, 1)] = -1.0
    return a, u, v


def parity_perturbation(bits: Sequence[int]) -> np.ndarray:
    """Dense perturbation B with zero column sums that makes the parity chain irreducible.

    Every forward transition loses weight (-1) to the reverse transition (+1), except
    at position 0 where the lost weight goes to the sigma-flip ``(0, s) -> (0, 1-s)``;
    the flip ties the two sheets of the chain together when the parity is even.
    """
    bits = _check_bits(bits)
    n = len(bits)
    b = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for s in (0, 1):
            col = _site(i, s)
            b[_site((i + 1) % n, s ^ bits[i]), col] -= 1.0
            if i == 0:
                b[_site(0, 1 - s), col] += 1.0
            else:
                b[_site(i - 1, s ^ bits[i - 1]), col] += 1.0
    return b


def gen_parity_chain_irreducible(bits: Sequence[int], delta: float) -> GeneralSparseMatrix:
    """Column-stochastic irreducible chain ``A + delta * B`` close to the parity chain."""
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    a, _, _ = gen_parity_chain(bits)
    dense = a.todense().real + delta * parity_perturbation(bits)
    return GeneralSparseMatrix.from_dense(dense)


def parity_delta(n: int, eps: float) -> float:
    """Perturbation strength that keeps the N-th power within eps/2 of the parity chain's."""
    if n < 1 or eps <= 0:
        raise PreconditionError("need n >= 1 and eps > 0")
    return math.log(1 + eps / (2 * math.sqrt(2))) / (8 * n * n)


def strongly_connected(a: GeneralSparseMatrix) -> bool:
    """Breadth-first reachability test on the directed graph of nonzeros, both directions."""
    n = a.dim
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for i, row in enumerate(a.rows):
        for j, _ in row:
            fwd[j].append(i)  # column j -> row i: transition j to i
            bwd[i].append(j)

    def reach_all(adj) -> bool:
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return len(seen) == n

    return reach_all(fwd) and reach_all(bwd)
