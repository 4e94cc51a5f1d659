"""Mean-field analysis of a parametrically driven cavity-magnon system.

Quantities are in scaled units: rates in units of kappa, amplitudes in
units of sqrt(gamma/K) and magnon occupations in units of gamma/K.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CavmagError,
    ConfigParse,
    ConvergenceFailure,
    InsufficientWindow,
    MissingPhysicalConstants,
    NotApplicable,
    NumericalInconsistency,
    ParameterError,
    RejectedDrive,
    RejectedSign,
    SingularSystem,
    StepSizeUnderflow,
    ZeroCoupling,
)
from .params import ScaledState, SystemParams, ValidatedParams, validate_params  # noqa: E402
from .steady_state import (  # noqa: E402
    Branch,
    BranchKind,
    branch_occupations,
    critical_strengths,
    derived_quantities,
    photon_occupation,
    reconstruct_amplitudes,
)
from .stability import PhaseLabel, branch_stability, classify_phase, phase_report, stability_at  # noqa: E402
from .dynamics import BACKEND, PulseSpec, SettleConfig, SolverConfig, integrate, mean_field_rhs, settle  # noqa: E402
from .fluctuations import FluctuationMoments, integrate_moments, moment_system, solve_steady_moments  # noqa: E402
from .sweep import (  # noqa: E402
    SweepGrid,
    analytic_critical_slope,
    critical_exponent_fit,
    fluctuation_curve,
    order_parameter_curve,
    phase_diagram,
)
