"""Oracle-query accounting and the estimate record returned by every method."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

#: Oracle calls charged per walk-operator application, in units of the sparsity D.
#: One application of W (or controlled W) needs a state preparation and its inverse,
#: each with O(D) calls to both the index oracle and the entry oracle.
DEFAULT_COST_CONSTANT = 4

LedgerMode = Literal["counted", "analytic"]


@dataclass
class QueryLedger:
    """Counters for modeled calls to the index oracle (``O_F``) and entry oracle (``O_A``).

    ``mode`` is ``"counted"`` when the totals come from simulated walk steps and
    ``"analytic"`` when they come from a complexity formula (amplitude estimation,
    Hamiltonian simulation) that is not simulated gate by gate.
    """

    calls_OF: int = 0
    calls_OA: int = 0
    walk_steps: int = 0
    cost_constant: int = DEFAULT_COST_CONSTANT
    mode: LedgerMode = "counted"

    def cost_per_step(self, sparsity: int) -> int:
        return self.cost_constant * sparsity

    def charge_walk_steps(self, sparsity: int, steps: int = 1) -> "QueryLedger":
        if steps < 0:
            raise ValueError("steps must be non-negative")
        cost = self.cost_per_step(sparsity) * steps
        self.calls_OF += cost
        self.calls_OA += cost
        self.walk_steps += steps
        return self

    def charge_calls(self, calls: int) -> "QueryLedger":
        """Charge ``calls`` to both oracles without counting walk steps."""
        if calls < 0:
            raise ValueError("calls must be non-negative")
        self.calls_OF += calls
        self.calls_OA += calls
        return self

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        """Return a new ledger holding the sum of both; modes combine to analytic if either is."""
        mode: LedgerMode = "analytic" if "analytic" in (self.mode, other.mode) else "counted"
        return QueryLedger(
            calls_OF=self.calls_OF + other.calls_OF,
            calls_OA=self.calls_OA + other.calls_OA,
            walk_steps=self.walk_steps + other.walk_steps,
            cost_constant=self.cost_constant,
            mode=mode,
        )

    def __add__(self, other: "QueryLedger") -> "QueryLedger":
        return self.merge(other)


def ledger_charge_walk_step(ledger: QueryLedger, sparsity: int, steps: int = 1) -> QueryLedger:
    """Charge ``steps`` walk-operator applications on a ``sparsity``-sparse matrix."""
    return ledger.charge_walk_steps(sparsity, steps)


@dataclass
class EstimateReport:
    """Outcome of one estimator run.

    ``error_bound`` is the a-priori precision the run was configured for (truncation
    plus estimation budget); ``std_error`` is the empirical standard error of a
    sampling method and 0 for deterministic ones.
    """

    value: complex
    std_error: float
    samples: int
    ledger: QueryLedger
    method: str
    seed: int | None = None
    wall_ms: float = 0.0
    internal_eps: float | None = None
    error_bound: float | None = None
    c_bound: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")
