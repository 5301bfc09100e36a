"""permlab: exact permanents of non-negative matrices, their degree-M Bethe
and scaled Sinkhorn approximations, and exact verification of the coefficient
identities, recursions, and inequality bounds relating them."""

from .bounds import (
    BoundsReport,
    M2Ratio,
    RatioIdentity,
    asymptotic_trend,
    check_coefficient_bounds,
    check_permanent_bounds,
    m2_ratio,
    ratio_identity,
)
from .coefficients import (
    CoefficientTriple,
    FractionalCore,
    c_bethe,
    c_gibbs,
    c_gibbs_brute,
    c_sinkhorn,
    coefficient_triple,
    cycle_count,
    fractional_core,
    pascal_table,
    peel,
    verify_recursion,
)
from .core import (
    FlowMatrix,
    Permutation,
    RationalMatrix,
    SupportPattern,
    enumerate_flow_matrices,
    kron_uniform,
    support,
    valid_permutations,
)
from .degree_m import (
    DegreeMResult,
    LiftingCollection,
    degree_m_bethe,
    degree_m_sinkhorn,
    lift,
)
from .errors import (
    DimensionMismatch,
    EmptySupport,
    InputFormat,
    InvalidPeel,
    NoConvergence,
    NonIntegral,
    PermlabError,
    SizeGuard,
    SizeMismatch,
    SupportViolation,
)
from .free_energy import (
    DoublyStochasticPoint,
    EntropyValues,
    MinimizationReport,
    bethe_free_energy,
    entropy_values,
    gibbs_entropy_modified,
    minimize_bethe,
    minimize_scaled_sinkhorn,
    scaled_sinkhorn_free_energy,
    sinkhorn_permanent_unscaled,
)
from .permanent import (
    PermDistribution,
    perm_brute,
    perm_distribution,
    perm_exact,
    perm_float,
    perm_rect,
)

__version__ = "0.1.0"
