"""Closed-form bounds, density evolution, LP design and finite-length formulas."""

from .bounds import (
    BoundResult,
    balls_in_bins_overhead,
    coverage_bounds,
    coverage_union_bound,
    full_rank_prob,
    ml_failure_bounds,
    symbol_ml_upper,
)
from .composition import concat_failure, copy_repair_bound, repair_complexity
from .evolution import (
    CheckResult,
    EvolutionTrace,
    InfeasibleLpError,
    LpProblem,
    and_or_evolution,
    check_distribution,
    design_distribution,
    design_grid,
    expected_ripple,
    ripple_floor,
)
from .graphs import ReducedDistribution, giant_component, modified_distribution
from .ldpc_finite import ConditionalErasure, ldpc_conditional, ldpc_finite_length
from .simplex import LpSolution, UnboundedError, maximize

__all__ = [
    "BoundResult",
    "CheckResult",
    "ConditionalErasure",
    "EvolutionTrace",
    "InfeasibleLpError",
    "LpProblem",
    "LpSolution",
    "ReducedDistribution",
    "UnboundedError",
    "and_or_evolution",
    "balls_in_bins_overhead",
    "check_distribution",
    "concat_failure",
    "copy_repair_bound",
    "coverage_bounds",
    "coverage_union_bound",
    "design_distribution",
    "design_grid",
    "expected_ripple",
    "full_rank_prob",
    "giant_component",
    "ldpc_conditional",
    "ldpc_finite_length",
    "maximize",
    "ml_failure_bounds",
    "modified_distribution",
    "repair_complexity",
    "ripple_floor",
    "symbol_ml_upper",
]
