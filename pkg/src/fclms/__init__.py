"""Fusion-center diffusion LMS/NLMS: Monte Carlo simulation, analytical
learning-curve models, stability bounds and fusion-weight design for
networks with cyclostationary white inputs tracking a random-walk plant."""

from .signals import (
    ConstantProfile,
    Gaussian,
    GaussianFifthPower,
    Laplacian,
    PlantModel,
    PulsedProfile,
    RngStreamSpec,
    SinusoidalProfile,
    ThreePoint,
    Uniform,
    kurtosis_of,
    make_plant,
    make_rng,
    mean_power,
    period_of,
    power_at,
    sample,
    two_sided_exponential,
)
from .simulation import (
    McResult,
    McRunState,
    NetworkConfig,
    NodeConfig,
    StepInputs,
    atc_dlms_step,
    atc_dnlms_step,
    cta_dlms_step,
    cta_dnlms_step,
    fusion_deviation,
    init_run_state,
    run_monte_carlo,
    step_function,
)
from .theory import (
    ModelAccuracyWarning,
    NonPositiveDenominatorError,
    TheoryCoefficients,
    TheoryState,
    dlms_coefficients,
    dnlms_coefficients,
    init_theory_state,
    slow_factors,
    slow_fixed_point,
    steady_state_msd,
    theory_trajectory,
)
from .design import (
    DesignInput,
    dlms_stability_bound,
    dnlms_stability_bound,
    min_weighted_square,
    optimal_weights_snr,
    optimal_weights_speed,
    small_step_steady_state,
)
from .harness import (
    ComparisonReport,
    ConfigError,
    ExperimentSpec,
    StabilityRow,
    builtin_specs,
    compare_curves,
    compare_stability,
    default_horizon,
    detect_ripple_period,
    load_spec,
    read_csv,
    resolve_spec,
    run_experiment,
    spec_from_dict,
    steady_window,
    write_csv,
)

__version__ = "0.1.0"
