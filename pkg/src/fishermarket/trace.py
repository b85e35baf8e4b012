"""Per-iteration convergence records, termination rules and solver reports."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, fields
from typing import Any, Callable, List, Optional, Sequence

import numpy as np


@dataclass
class TraceRow:
    iteration: int
    objective_value: float
    duality_gap: float = math.nan
    normalized_gap: float = math.nan
    rel_price_error: float = math.nan
    backtracks_this_iter: int = 0
    cumulative_projections: int = 0
    elapsed_nanoseconds: int = 0


TRACE_COLUMNS = [f.name for f in fields(TraceRow)]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class ConvergenceTrace:
    rows: List[TraceRow] = field(default_factory=list)
    gap_kind: str = ""

    def append(self, row: TraceRow) -> None:
        if self.rows and row.iteration != self.rows[-1].iteration + 1:
            raise ValueError("trace iterations must be consecutive")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def first_index(self, predicate: Callable[[TraceRow], bool]) -> Optional[int]:
        """Position of the first row satisfying ``predicate`` (None if never)."""
        for k, row in enumerate(self.rows):
            if predicate(row):
                return k
        return None

    def to_csv(self, comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.rows:
            writer.writerow([_fmt(getattr(r, c)) for c in TRACE_COLUMNS])
        return buf.getvalue()


@dataclass(frozen=True)
class Measurement:
    """What a monitor reports about an iterate.

    ``estimate`` is the vector compared against the reference in a
    relative-error criterion: prices for linear and QL markets, utilities
    for Leontief markets.
    """

    duality_gap: float = math.nan
    normalized_gap: float = math.nan
    estimate: Optional[np.ndarray] = None


Monitor = Callable[[Any, float], Measurement]


def relative_error(estimate, reference) -> float:
    estimate = np.asarray(estimate, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return float(np.max(np.abs(estimate - reference) / reference))


@dataclass
class TerminationSpec:
    """Stop at the first satisfied criterion; unset criteria are ignored.

    ``rel_price_error`` is ``(reference, eta)``; ``objective_tol`` stops once
    an iteration decreases the objective by no more than the tolerance.
    With ``require_all`` the run continues until every set criterion has
    held at least once (reason ``"all_criteria"``), which lets one run
    serve several thresholds. ``max_iters`` always stops the run.
    """

    max_iters: int = 10_000
    rel_price_error: Optional[tuple] = None
    normalized_gap: Optional[float] = None
    duality_gap: Optional[float] = None
    objective_tol: Optional[float] = None
    require_all: bool = False

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        for name in ("normalized_gap", "duality_gap", "objective_tol"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive")
        if self.rel_price_error is not None:
            ref, eta = self.rel_price_error
            if not eta > 0 or np.any(np.asarray(ref) <= 0):
                raise ValueError("relative-error threshold and reference must be positive")

    @property
    def needs_monitor(self) -> bool:
        return any(
            c is not None for c in (self.rel_price_error, self.normalized_gap, self.duality_gap)
        )

    @property
    def criteria(self) -> List[str]:
        names = ["rel_price_error", "normalized_gap", "duality_gap", "objective_tol"]
        return [c for c in names if getattr(self, c) is not None]

    def satisfied(self, row: TraceRow, prev: Optional[TraceRow]) -> List[str]:
        """Criteria (other than ``max_iters``) that hold at ``row``."""
        hits = []
        if self.rel_price_error is not None and row.rel_price_error <= self.rel_price_error[1]:
            hits.append("rel_price_error")
        if self.normalized_gap is not None and row.normalized_gap <= self.normalized_gap:
            hits.append("normalized_gap")
        if self.duality_gap is not None and row.duality_gap <= self.duality_gap:
            hits.append("duality_gap")
        if (
            self.objective_tol is not None
            and prev is not None
            and prev.objective_value - row.objective_value <= self.objective_tol
        ):
            hits.append("objective_tol")
        return hits

    def reason(self, row: TraceRow, prev: Optional[TraceRow]) -> Optional[str]:
        hits = self.satisfied(row, prev)
        if hits:
            return hits[0]
        if row.iteration >= self.max_iters:
            return "max_iters"
        return None


@dataclass
class SolverReport:
    final_iterate: Any
    iterations: int
    projections_or_prox_count: int
    trace: ConvergenceTrace
    termination_reason: str
    stepsize: float = math.nan

    @property
    def converged(self) -> bool:
        return self.termination_reason != "max_iters"


class Recorder:
    """Builds trace rows for a solver loop and evaluates termination."""

    def __init__(self, term: TerminationSpec, monitor: Optional[Monitor], record_time: bool = True):
        if term.needs_monitor and monitor is None:
            raise ValueError("termination criteria on gaps or errors need a monitor")
        self.term = term
        self.monitor = monitor
        self.record_time = record_time
        self.trace = ConvergenceTrace()
        self.projections = 0
        self._reached = set()
        self._t0 = time.perf_counter_ns()

    def record(self, iteration: int, x, objective_value: float, gamma: float, backtracks: int = 0,
               projections: int = 0) -> Optional[str]:
        self.projections += projections
        m = self.monitor(x, gamma) if self.monitor is not None else Measurement()
        err = math.nan
        if self.term.rel_price_error is not None and m.estimate is not None:
            err = relative_error(m.estimate, self.term.rel_price_error[0])
        row = TraceRow(
            iteration=iteration,
            objective_value=float(objective_value),
            duality_gap=float(m.duality_gap),
            normalized_gap=float(m.normalized_gap),
            rel_price_error=err,
            backtracks_this_iter=int(backtracks),
            cumulative_projections=self.projections,
            elapsed_nanoseconds=(time.perf_counter_ns() - self._t0) if self.record_time else 0,
        )
        prev = self.trace.rows[-1] if self.trace.rows else None
        self.trace.append(row)
        if not self.term.require_all:
            return self.term.reason(row, prev)
        self._reached.update(self.term.satisfied(row, prev))
        if self.term.criteria and self._reached.issuperset(self.term.criteria):
            return "all_criteria"
        return "max_iters" if row.iteration >= self.term.max_iters else None
