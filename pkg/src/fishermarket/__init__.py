"""Fisher-market equilibria with first-order methods."""

from .errors import *  # noqa: F401,F403
from .market import (
    BudgetMode,
    Distribution,
    EquilibriumBounds,
    GenerationSpec,
    MarketInstance,
    UtilityClass,
    equilibrium_bounds,
    generate_instance,
    validate_instance,
)
from .metrics import (
    EquilibriumCandidate,
    VerificationReport,
    duality_gap_leontief,
    duality_gap_linear,
    duality_gap_ql,
    kl_divergence,
    leontief_utilities_from_prices,
    recover_prices_linear,
    relative_price_error,
    verify_equilibrium,
)
from .projections import (
    SimplexProjection,
    project_box_simplex,
    project_product_simplexes,
    project_simplex,
)
from .trace import ConvergenceTrace, SolverReport, TerminationSpec

__version__ = "0.1.0"
