"""Spectral solver, peakon dynamics and wave-breaking diagnostics for the generalized mu-CH equation."""

from .blowup import (BlowupAssessment, BreakingConstants, DetectionReport, breaking_constants,
                     runtime_detector, thm71_tstar, thm72_check, thm74_check, thm75_check)
from .characteristics import CharTrace, exact_ux_mu0zero, exact_uxx_mu0zero, trace_characteristic
from .errors import (BlowupSuspectedError, BlowupTimeExceededError, CollisionError, ConfigError,
                     InvalidFieldError, MuchLabError, NoRealPeakonError)
from .grid import (PeriodicGrid, apply_A, apply_Ainv, convolve_g, convolve_gx, dealias, deriv,
                   green_g, green_gx, interpolate, mean, to_spectrum)
from .model import DiagnosticsSample, ModelParams, StateU, conserved, hamiltonians, momentum, rhs_u
from .peakons import (AmplitudeSolution, PeakonSystem, amplitude_for_speed, integrate_peakons,
                      multipeakon_rhs, sample_field, speed_for_amplitude, two_peakon_closed_form)
from .timestepper import RunResult, StepControl, Termination, integrate, step_rk4

__version__ = "0.1.0"

__all__ = [
    "AmplitudeSolution", "BlowupAssessment", "BlowupSuspectedError", "BlowupTimeExceededError",
    "BreakingConstants", "CharTrace", "CollisionError", "ConfigError", "DetectionReport",
    "DiagnosticsSample", "InvalidFieldError", "ModelParams", "MuchLabError", "NoRealPeakonError",
    "PeakonSystem", "PeriodicGrid", "RunResult", "StateU", "StepControl", "Termination",
    "amplitude_for_speed", "apply_A", "apply_Ainv", "breaking_constants", "conserved",
    "convolve_g", "convolve_gx", "dealias", "deriv", "exact_ux_mu0zero", "exact_uxx_mu0zero",
    "green_g", "green_gx", "hamiltonians", "integrate", "integrate_peakons", "interpolate", "mean",
    "momentum", "multipeakon_rhs", "rhs_u", "runtime_detector", "sample_field",
    "speed_for_amplitude", "step_rk4", "thm71_tstar", "thm72_check", "thm74_check",
    "thm75_check", "to_spectrum", "trace_characteristic", "two_peakon_closed_form",
]
