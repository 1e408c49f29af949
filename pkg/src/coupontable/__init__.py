"""Exact law, limit classification and Monte Carlo checks for one cell of a
contingency table with fixed margins (the coupon-collector model)."""

from .asymptotics import (
    Classification,
    LimitStatement,
    PoissonCase,
    Regime,
    alpha_limits,
    classify,
    limit_statement,
    rho_estimate,
    variance_order,
)
from .diagnostics import (
    MissCountParams,
    PoissonLaw,
    empirical_pmf,
    ks_to_normal,
    miss_count_dist,
    stein_chen_bound_I_II,
    stein_chen_bound_III,
    tv_distance,
)
from .errors import (
    CellOutOfRange,
    CouponTableError,
    DimensionError,
    DomainError,
    EmptyInput,
    MarginOutOfRange,
    NoConvergence,
    ResourceLimit,
    SpecError,
    Unclassifiable,
)
from .exact import MomentSequence, Pmf, cell_pmf, hypergeom_pmf, moments_recursive, variance_m2
from .model import (
    CellRef,
    GrowthSpec,
    GrowthTable,
    MarginTable,
    MarginVector,
    eval_growth,
    reduce_cell,
    validate_margins,
)
from .powersum import PowerSum
from .sampler import (
    DecompositionSums,
    IndicatorMatrix,
    birthday_scenario,
    decompose,
    sample_cell,
    sample_cells,
    sample_table,
)

__version__ = "0.1.0"
