"""Single-server queues with customer abandonment and their heavy-traffic limits.

The package simulates the n-th system of a heavy-traffic sequence (arrival
rate n*lam, service rate n*lam - sqrt(n)*theta, generally-distributed
patience), computes the stationary laws of the two limit diffusions, and
provides convergence diagnostics tying the two together.
"""

from .distributions import (
    Deterministic,
    Distribution,
    Empirical,
    EmptyEmpiricalError,
    Erlang,
    Exponential,
    HyperExponential,
    LogNormal,
    PatienceInversionError,
    Uniform,
    cdf,
    distribution_from_config,
    distribution_to_config,
    quantile,
    sample,
    scaled_patience_cdf,
    scaled_patience_sample,
)
from .diffusion import (
    DensityError,
    DiffusionSpec,
    LinearROU,
    NonlinearHazard,
    StationaryLaw,
    abandonment_limit,
    mean_rou,
    normal_hazard_rate,
    simulate_reflected_sde,
    stationary_density,
)
from .harness import (
    ConvergenceReport,
    ExperimentPlan,
    InsufficientSamplesError,
    ValidationReport,
    ks_distance,
    run_experiment,
    run_experiment_detailed,
    validate_assumptions,
)
from .hazards import (
    ConstantHazard,
    HazardFunction,
    HazardRangeError,
    LinearHazard,
    PiecewiseLinearHazard,
    PolynomialHazard,
    TabulatedHazard,
    cumulative_hazard,
    double_cumulative_hazard,
    hazard_from_config,
    hazard_to_config,
)
from .randomness import substream
from .regulator import (
    ConeConditionError,
    DrainResult,
    PathRecord,
    RegulatedPair,
    apply_regulator,
    deterministic_trajectory,
    drain_check,
    estimate_lipschitz,
    skorokhod_reflection,
)
from .simulator import (
    Counts,
    DecompositionTrace,
    HazardScaledPatience,
    SimResult,
    SimulationDiverged,
    SystemConfig,
    UnscaledPatience,
    run_replication,
    step_waiting_time,
    trace_decomposition,
    write_samples_csv,
)

__version__ = "0.1.0"
