"""Degenerate monostable reaction-diffusion fronts with heavy-tailed data."""
from .errors import (
    AlleeFrontsError,
    ConfigError,
    ConstructionError,
    DomainError,
    FitError,
    InsufficientDataError,
    NumericalStabilityError,
    PastBlowupError,
    ResourceError,
    UnsupportedProfileError,
)
from .model import (
    FunctionProfile,
    InitialProfile,
    NonlinearityModel,
    classify_tail,
    eval_initial,
    eval_nonlinearity,
    validate_model,
)
from .solver import GridState, RunResult, SolverConfig, init_grid, run, step
from .levelsets import (
    KinematicsFit,
    LevelTrajectory,
    detect_regime_empirical,
    extract_level,
    fit_growth,
)
from .theory import (
    BumpConstants,
    EnvelopeParams,
    bump_constants,
    classify_regime,
    closed_form_w,
    envelope_lower,
    envelope_upper,
    noacc_speed,
    predicted_exponent,
    tail_coeffs_gh,
    y_theta,
)
from .certificates import (
    ResidualReport,
    check_bump_subsolution,
    check_global_supersolution,
    check_ordering,
    check_traveling_supersolution,
)
from .config import RunConfig, build_config, load_config

__version__ = "0.1.0"
