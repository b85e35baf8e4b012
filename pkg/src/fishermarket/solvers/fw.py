"""Frank-Wolfe over a product of unit simplexes (one per item column)."""

from __future__ import annotations

import enum
import math
from typing import Optional

import numpy as np

from ..trace import Monitor, Recorder, SolverReport, TerminationSpec
from .pg import Objective, _evaluate

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class StepRule(str, enum.Enum):
    STATIC = "static"
    EXACT_LINE = "exact"


def column_vertex(gradient: np.ndarray) -> np.ndarray:
    """Vertex minimising <gradient, w>: a unit vector per column at the
    smallest-index argmin."""
    w = np.zeros_like(gradient, dtype=float)
    w[np.argmin(gradient, axis=0), np.arange(gradient.shape[1])] = 1.0
    return w


def golden_section(phi, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-12) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = phi(d)
    best = min((phi(a), a), (phi(b), b), (fc, c), (fd, d))
    return best[1]


def _step_size(objective: Objective, x, direction, t: int, rule: StepRule) -> float:
    if StepRule(rule) is StepRule.STATIC:
        return 2.0 / (2.0 + t)
    return golden_section(lambda g: objective(x + g * direction).value)


def fw_step(objective: Objective, x, t: int, rule: StepRule = StepRule.STATIC,
            current=None) -> np.ndarray:
    """``x + gamma_t (w - x)`` with ``w`` the column-wise vertex LMO answer."""
    cur = current if current is not None else objective(x)
    direction = column_vertex(cur.gradient) - x
    return x + _step_size(objective, x, direction, t, rule) * direction


def frank_wolfe(objective: Objective, x0, term: TerminationSpec,
                rule: StepRule = StepRule.EXACT_LINE, monitor: Optional[Monitor] = None,
                record_time: bool = True) -> SolverReport:
    rec = Recorder(term, monitor, record_time)
    x = np.array(x0, dtype=float)
    cur = _evaluate(objective, x)
    t = 0
    reason = rec.record(t, x, cur.value, math.nan)
    while reason is None:
        x = fw_step(objective, x, t, rule, cur)
        cur = _evaluate(objective, x)
        t += 1
        # one LMO call per iteration; reported in the projection column
        reason = rec.record(t, x, cur.value, math.nan, projections=1)
    return SolverReport(x, t, rec.projections, rec.trace, reason)
