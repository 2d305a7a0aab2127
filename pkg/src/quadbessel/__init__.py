"""quadbessel: obliquely repelled two-dimensional Bessel diffusions.

A planar Brownian motion is kept in the nonnegative quadrant by singular
1/x-type drifts with an oblique interaction matrix.  This package classifies
parameter regimes exactly (corner and edge hitting, existence/uniqueness,
product-form gamma stationary law), simulates the system with
positivity-preserving integrators, and verifies the probabilistic structure
by reproducible Monte Carlo experiments.
"""

__version__ = "0.1.0"

from .bessel import (
    BesselSpec,
    BoundaryClass,
    bessel_density_weight,
    bessel_hitting_zero_cdf,
    besq_exact_transition,
    boundary_class,
)
from .integrator import (
    EventSpec,
    Path,
    PathState,
    StepConfig,
    correlated_increments,
    drift_implicit_step,
    simulate_path,
    truncated_reciprocal,
    truncated_step,
)
from .montecarlo import (
    EnsembleConfig,
    EnsembleSummary,
    HittingEstimate,
    ImportanceResult,
    MartingalePoint,
    hitting_probability,
    importance_estimate,
    martingale_drift_test,
    run_ensemble,
    stationary_sample,
    stream_generator,
)
from .params import O2BPParams
from .regime import (
    CornerStatus,
    CornerVerdict,
    EdgeStatus,
    ExistenceClass,
    ExistenceVerdict,
    RegimeReport,
    StationaryLaw,
    check_C1,
    check_C2a,
    check_C2b,
    check_C3_at,
    check_degenerate_collision,
    check_skew_bound,
    classify,
    corner_verdict,
    edge_verdicts,
    existence_class,
    quadratic_nonneg,
    search_C3,
    skew_symmetry_residual,
    stationary_law,
    stationary_law_report,
    supermartingale_coefficient,
)
from .stats import (
    BetaLaw,
    GammaLaw,
    KSResult,
    beta_cdf,
    beta_gamma_transform,
    gamma_cdf,
    gamma_characteristic,
    gamma_sample,
    ks_test,
    ks_two_sample,
    regularized_lower_gamma,
    regularized_upper_gamma,
)

__all__ = [name for name in dir() if not name.startswith("_")]
