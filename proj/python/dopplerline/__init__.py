"""Python access to the dopplerline simulator and analysis chain."""

from ._core import (
    AlignmentFailed,
    CflViolation,
    CriticalCurrentExceeded,
    EmptyGate,
    Error,
    FitDiverged,
    InsufficientSupport,
    IoError,
    LineSpec,
    NonFiniteField,
    OracleError,
    SignError,
    SingularInterface,
    ValidationError,
    catalog,
    compose_doppler,
    condition_boundaries,
    default_line,
    doppler_ratio,
    fit_amplitude_sweep,
    parse_current,
    phase_velocity,
    run_scenario,
    scenario_json,
    selftest,
    shift_from_current,
)

__all__ = [
    "AlignmentFailed",
    "CflViolation",
    "CriticalCurrentExceeded",
    "EmptyGate",
    "Error",
    "FitDiverged",
    "InsufficientSupport",
    "IoError",
    "LineSpec",
    "NonFiniteField",
    "OracleError",
    "SignError",
    "SingularInterface",
    "ValidationError",
    "catalog",
    "compose_doppler",
    "condition_boundaries",
    "default_line",
    "doppler_ratio",
    "fit_amplitude_sweep",
    "parse_current",
    "phase_velocity",
    "run_scenario",
    "scenario_json",
    "selftest",
    "shift_from_current",
]
