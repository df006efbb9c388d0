"""Scaling sweeps: oracle calls and wall time against ``t`` and ``1/eps``."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .matrix import gen_cycle_walk, gen_random_stable
from .overlap import METHODS, dense_power_oracle, matrix_power_element

SUITES = ("scaling-t", "scaling-eps", "method-compare")
COLUMNS = ("method", "t", "eps", "oracle_calls", "wall_ms", "abs_error")

DEFAULT_T = {"walk-sample": (4, 16, 64, 256), "walk-lcu": (4, 16, 64, 256),
             "fourier": (8, 16, 32, 64, 128), "montecarlo": (4, 16, 64, 256), "dense": (4, 16, 64, 256)}
DEFAULT_EPS = {"walk-sample": (0.2, 0.1, 0.05, 0.025), "walk-lcu": (0.1, 0.03, 0.01, 0.003, 0.001),
               "fourier": (0.1, 0.05, 0.025, 0.0125), "montecarlo": (0.2, 0.1, 0.05, 0.025),
               "dense": (0.1, 0.01)}
FOURIER_REPEATS = 3


@dataclass
class BenchRow:
    method: str
    t: int
    eps: float
    oracle_calls: int
    wall_ms: float
    abs_error: float


@dataclass
class BenchTable:
    suite: str
    rows: list[BenchRow] = field(default_factory=list)
    slopes: dict[str, float] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r.method, r.t, repr(r.eps), r.oracle_calls, f"{r.wall_ms:.3f}", repr(r.abs_error)])
        if self.slopes:
            buf.write("# slope " + " ".join(f"{k}={v:.4f}" for k, v in self.slopes.items()) + "\n")
        return buf.getvalue()


def fit_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.any(x <= 0) or np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def bench_instance(method: str):
    """Test instance per method: an 8-cycle walk (symmetric, stochastic, ``||A||_1 = 1``)
    for every method except Fourier, which uses a random 8x8 stable matrix."""
    if method == "fourier":
        a = gen_random_stable(8, 3, 0.9, seed=11)
    else:
        a = gen_cycle_walk(8)
    u = np.zeros(a.dim, dtype=np.complex128)
    u[0] = 1.0
    return a, u, u.copy()


def run_point(method: str, t: int, eps: float, seed: int = 0) -> BenchRow:
    a, u, v = bench_instance(method)
    exact = dense_power_oracle(a, u, v, t)
    if method == "fourier":
        # stepped simulator: each harmonic costs time linear in its evolution time
        reps = [matrix_power_element(a, u, v, t, eps, "fourier", seed=seed, simulator="stepped")
                for _ in range(FOURIER_REPEATS)]
        rep = min(reps, key=lambda r: r.wall_ms)
    else:
        rep = matrix_power_element(a, u, v, t, eps, method, seed=seed)
    return BenchRow(method, t, eps, rep.ledger.calls_OF, rep.wall_ms, abs(rep.value - exact))


def run_suite(suite: str, method: str | None = None, ts=None, epss=None, seed: int = 0) -> BenchTable:
    if suite not in SUITES:
        raise PreconditionError(f"unknown suite {suite!r}")
    table = BenchTable(suite)
    if suite == "method-compare":
        t = (ts or (8,))[0]
        eps = (epss or (0.1,))[0]
        for k, m in enumerate(METHODS):
            table.rows.append(run_point(m, t, eps, seed + k))
        return table

    method = method or "walk-sample"
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}")
    if suite == "scaling-t":
        ts = tuple(ts or DEFAULT_T[method])
        eps = (epss or (0.1,))[0]
        for k, t in enumerate(ts):
            table.rows.append(run_point(method, t, eps, seed + k))
        x = [r.t for r in table.rows]
        table.slopes["oracle_calls_vs_t"] = fit_slope(x, [r.oracle_calls for r in table.rows])
        table.slopes["wall_ms_vs_t"] = fit_slope(x, [r.wall_ms for r in table.rows])
    else:
        epss = tuple(epss or DEFAULT_EPS[method])
        t = (ts or (64,))[0]
        for k, eps in enumerate(epss):
            table.rows.append(run_point(method, t, eps, seed + k))
        x = [1.0 / r.eps for r in table.rows]
        table.slopes["oracle_calls_vs_inv_eps"] = fit_slope(x, [r.oracle_calls for r in table.rows])
        table.slopes["wall_ms_vs_inv_eps"] = fit_slope(x, [r.wall_ms for r in table.rows])
    return table


def fourier_wall_sweep(ts=DEFAULT_T["fourier"], eps: float = 0.1) -> BenchTable:
    return run_suite("scaling-t", "fourier", ts=ts, epss=(eps,))


__all__ = ["BenchRow", "BenchTable", "fit_slope", "run_point", "run_suite", "bench_instance",
           "fourier_wall_sweep"]
