"""Gaussian-ansatz reduction of the trapped Gross-Pitaevskii equation and its Ermakov-Lewis invariant."""
from .core import (
    ConfigError,
    Constant,
    DomainError,
    GaussianState,
    GridSpec,
    LinearRamp,
    NumericalBlowupError,
    NumericalFailure,
    PhysicalParams,
    ScenarioConfig,
    Sinusoidal,
    WidthCollapseError,
    alpha_from_sigma,
    omega_eval,
    sigma_from_alpha,
)
from .dynamics import (
    TrajectoryRecord,
    integrate,
    integrate_sigma_form,
    k_of_t,
    rhs_alpha,
    rhs_q,
    rhs_sigma,
    stationary_alpha,
)
from .invariant import DriftReport, drift_report, drift_rhs, lewis_invariant

__version__ = "0.1.0"
