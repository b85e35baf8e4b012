"""First-order equilibrium solvers."""

from .closed_form import cobb_douglas_solve
from .fw import StepRule, column_vertex, frank_wolfe, fw_step, golden_section
from .pg import LinesearchParams, LinesearchResult, linesearch_step, pg_fixed, pg_linesearch
from .pr import (
    initial_bids_linear,
    initial_bids_ql,
    md_step_ql,
    pr_step_linear,
    proportional_response,
)
from .problems import (
    FirstOrderProblem,
    build_problem,
    eg_linear_problem,
    leontief_problem,
    ql_initial_point,
    ql_problem,
)
from .reference import reference_solve

__all__ = [
    "FirstOrderProblem",
    "LinesearchParams",
    "LinesearchResult",
    "StepRule",
    "build_problem",
    "cobb_douglas_solve",
    "column_vertex",
    "eg_linear_problem",
    "frank_wolfe",
    "fw_step",
    "golden_section",
    "initial_bids_linear",
    "initial_bids_ql",
    "leontief_problem",
    "linesearch_step",
    "md_step_ql",
    "pg_fixed",
    "pg_linesearch",
    "pr_step_linear",
    "proportional_response",
    "ql_initial_point",
    "ql_problem",
    "reference_solve",
]
