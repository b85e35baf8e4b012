"""High-accuracy reference equilibria used as ground truth in benchmarks."""

from __future__ import annotations

from ..errors import ReferenceDidNotConverge
from ..market import MarketInstance, UtilityClass
from ..metrics import EquilibriumCandidate
from ..trace import TerminationSpec
from .closed_form import cobb_douglas_solve
from .pg import pg_linesearch
from .problems import build_problem

DEFAULT_REFERENCE_ITERS = 200_000


def reference_solve(inst: MarketInstance, target_gap: float = 1e-10,
                    max_iters: int = DEFAULT_REFERENCE_ITERS) -> EquilibriumCandidate:
    """Run PG with linesearch until the duality gap divided by n is at most
    ``target_gap``. Cobb-Douglas markets use the closed form directly.

    Raises :class:`ReferenceDidNotConverge` carrying the last candidate.
    """
    if inst.utility_class is UtilityClass.COBB_DOUGLAS:
        x, p = cobb_douglas_solve(inst)
        return EquilibriumCandidate(prices=p, allocation=x)
    prob = build_problem(inst)
    term = TerminationSpec(max_iters=max_iters, normalized_gap=target_gap)
    report = pg_linesearch(prob.objective, prob.projector, prob.x0, prob.linesearch_params(),
                           term, prob.measure, record_time=False)
    cand = prob.candidate(report.final_iterate, report.stepsize)
    if not report.converged:
        last = report.trace.rows[-1].normalized_gap
        raise ReferenceDidNotConverge(
            max_iters, cand, f"(normalized gap {last:.3e} > {target_gap:.1e})"
        )
    return cand

