"""Projected gradient with a fixed stepsize or with backtracking linesearch."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from ..errors import BacktrackOverflow, NonFiniteObjective
from ..objectives import ObjectiveEval
from ..trace import Monitor, Recorder, SolverReport, TerminationSpec

Objective = Callable[[np.ndarray], ObjectiveEval]
Projector = Callable[[np.ndarray], np.ndarray]

# below this relative change in f, function values are too close to resolve
# the decrease test, so the equivalent gradient form is used instead
_VALUE_RESOLUTION = 1e-10


@dataclass(frozen=True)
class LinesearchParams:
    """Increment ``alpha``, decrement ``beta`` and stepsize cap ``gamma_max``.

    ``lipschitz`` (an upper bound on the gradient Lipschitz constant) is
    optional; when given, a step that backtracks four times past the
    theoretical cap raises :class:`BacktrackOverflow`.
    """

    alpha: float = 1.02
    beta: float = 0.8
    gamma_max: float = 1.0
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError("alpha must be >= 1")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not self.gamma_max > 0:
            raise ValueError("gamma_max must be positive")

    @classmethod
    def for_lipschitz(cls, lipschitz: float, alpha: float = 1.02, beta: float = 0.8,
                      cap_factor: float = 100.0) -> "LinesearchParams":
        return cls(alpha, beta, cap_factor * lipschitz, lipschitz)

    def backtrack_cap(self, lipschitz: Optional[float] = None) -> float:
        """Bound ``1 + log(Gamma / gamma_min) / log(1/beta)`` on backtracks per step."""
        lf = self.lipschitz if lipschitz is None else lipschitz
        if lf is None:
            return math.inf
        gamma_min = min(self.gamma_max, self.beta / lf)
        return 1.0 + math.log(self.gamma_max / gamma_min) / math.log(1.0 / self.beta)


class LinesearchResult(NamedTuple):
    x: np.ndarray
    gamma: float
    k: int
    evaluation: ObjectiveEval


def _evaluate(objective: Objective, x) -> ObjectiveEval:
    ev = objective(x)
    if not math.isfinite(ev.value):
        raise NonFiniteObjective(f"objective evaluated to {ev.value!r}")
    return ev


def _sufficient_decrease(cur: ObjectiveEval, new: ObjectiveEval, d, sq: float, gamma: float) -> bool:
    """``f(x+d) <= f(x) + <g, d> + |d|^2 / (2 gamma)``.

    When the two values agree to about 10 digits their difference is mostly
    rounding; the test is then evaluated as ``<grad f(x+d) - g, d> <= |d|^2 / gamma``,
    which is the same condition with the curvature term integrated by the
    trapezoid rule (exact for quadratics).
    """
    scale = max(abs(cur.value), abs(new.value))
    if abs(new.value - cur.value) > _VALUE_RESOLUTION * scale:
        return new.value - cur.value - float(np.vdot(cur.gradient, d)) <= sq / (2.0 * gamma)
    return float(np.vdot(new.gradient - cur.gradient, d)) <= sq / gamma


def linesearch_step(objective: Objective, projector: Projector, x, gamma_prev: float, k_prev: int,
                    params: LinesearchParams, current: Optional[ObjectiveEval] = None) -> LinesearchResult:
    """One backtracking step; ``k`` is the number of reductions performed."""
    cur = current if current is not None else _evaluate(objective, x)
    gamma = min(params.alpha * gamma_prev, params.gamma_max) if k_prev == 0 else gamma_prev
    limit = 4 * params.backtrack_cap()
    g = cur.gradient
    k = 0
    while True:
        x_new = projector(x - gamma * g)
        d = x_new - x
        new = _evaluate(objective, x_new)
        sq = float(np.vdot(d, d))
        if sq == 0.0 or _sufficient_decrease(cur, new, d, sq, gamma):
            return LinesearchResult(x_new, gamma, k, new)
        k += 1
        if k > limit or gamma == 0.0:
            raise BacktrackOverflow(
                f"{k} backtracks exceed 4x the bound {limit / 4:.1f}; gradient may be wrong"
            )
        gamma *= params.beta


def pg_fixed(objective: Objective, projector: Projector, x0, gamma: float, term: TerminationSpec,
             monitor: Optional[Monitor] = None, record_time: bool = True) -> SolverReport:
    """Projected gradient ``x <- P(x - gamma * grad f(x))`` with constant ``gamma``."""
    if not gamma > 0:
        raise ValueError("stepsize must be positive")
    rec = Recorder(term, monitor, record_time)
    x = np.array(x0, dtype=float)
    cur = _evaluate(objective, x)
    t = 0
    reason = rec.record(t, x, cur.value, gamma)
    while reason is None:
        x = projector(x - gamma * cur.gradient)
        cur = _evaluate(objective, x)
        t += 1
        reason = rec.record(t, x, cur.value, gamma, projections=1)
    return SolverReport(x, t, rec.projections, rec.trace, reason, gamma)


def pg_linesearch(objective: Objective, projector: Projector, x0, params: LinesearchParams,
                  term: TerminationSpec, monitor: Optional[Monitor] = None,
                  record_time: bool = True) -> SolverReport:
    """Projected gradient driven by :func:`linesearch_step`.

    Starts from ``gamma_{-1} = Gamma`` and ``k_{-1} = 0``. The projection
    count in the report includes every backtracking projection.
    """
    rec = Recorder(term, monitor, record_time)
    x = np.array(x0, dtype=float)
    cur = _evaluate(objective, x)
    gamma, k = params.gamma_max, 0
    t = 0
    reason = rec.record(t, x, cur.value, gamma)
    while reason is None:
        x, gamma, k, cur = linesearch_step(objective, projector, x, gamma, k, params, cur)
        t += 1
        reason = rec.record(t, x, cur.value, gamma, backtracks=k, projections=k + 1)
    return SolverReport(x, t, rec.projections, rec.trace, reason, gamma)
