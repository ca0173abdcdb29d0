"""Aggregate cognitive-radio interference under path loss and lognormal shadowing."""

__version__ = "0.1.0"

from .admission import (
    AdmissionPolicy,
    AdmissionResult,
    interference_budget,
    pez_filter,
    rem_centralized,
    rem_decentralized,
    solve_pez_radius,
)
from .analytic import (
    FwFit,
    MomentSet,
    calibrate_power,
    distance_moment,
    distance_moment_approx,
    fenton_wilkinson_fit,
    interference_moment,
    moment_set,
    single_interferer_cdf,
    skewness_exact,
    skewness_ratio_asymptotic,
    skewness_ratio_exact,
    std_normal_cdf,
)
from .engine import (
    EmpiricalCdf,
    ReliabilityEstimate,
    aggregate_interference,
    empirical_cdf,
    estimate_reliability,
    ks_distance,
)
from .scenario import (
    Geometry,
    Population,
    PowerLevels,
    PropagationEnv,
    Realization,
    Scenario,
    SeedSpec,
    sample_annulus_distance,
    sample_cr_count,
    sample_realization,
)
