"""Revenue-maximizing rollout schedules for user-facing inconvenience.

Retention curves, survival under stepped increases, adaptation time,
lasting effects, discounted-revenue optimization, and a seeded Monte-Carlo
simulator with simulated A/B estimation.
"""

from .adaptation import ConstantClock, PowerClock, avg_rate, invert_rate, is_inelastic, rollout_time
from .arum import (
    ArumSpec,
    ExponentialNoise,
    LinearCost,
    LogisticNoise,
    NormalNoise,
    PowerCost,
    UniformNoise,
)
from .estimators import RetentionEstimator, RolloutOptimizer
from .exceptions import (
    CapReachedWarning,
    ClassificationError,
    DomainError,
    InfiniteRateError,
    ParameterError,
    RangeError,
    RolloutError,
)
from .lasting import (
    LastingEffect,
    LinearDecay,
    PowerDecay,
    arum_step_retention,
    non_monotonicity_witness,
    step_retention,
    survival_s_lasting,
)
from .optimizer import (
    AffineRevenue,
    IdentityRevenue,
    LogShiftedRevenue,
    OptimizationResult,
    PowerRevenue,
    RevenueModel,
    Schedule,
    optimize,
    optimize_one_step,
    optimize_sweep,
    revenue_pi,
    z_star,
    z_star_lasting,
)
from .retention import (
    ArumDerived,
    CurvatureClass,
    ExpPower,
    InversePower,
    PolyCap,
    RetentionCurve,
    ScaledExpPower,
    Tabulated,
    classify_curvature,
    product_bound_check,
    survival_s,
    tangent_point,
)
from .simulator import (
    CohortConfig,
    CohortResult,
    end_to_end_estimate_and_optimize,
    estimate_p,
    monotone_fit,
    simulate_schedule,
)
from .special import normal_cdf

__version__ = "0.1.0"
