"""Numerics for the singular damped oscillator

    (|u'|^l u')' + c |u'|^alpha u' + d |u|^beta u = 0.

Submodules: :mod:`model` (parameters and closed forms), :mod:`integrator`
(adaptive integration in the flux variable), :mod:`analysis` (energy audit,
decay fits, oscillation class, polar diagnostics), :mod:`constructor`
(fixed-point construction of fast solutions), :mod:`regions` (invariant
sector for slow solutions) and :mod:`cli`.
"""
from .analysis import (
    AuditReport,
    PolarState,
    RateEstimate,
    classify_empirical,
    energy_audit,
    fit_decay_exponent,
    polar_track,
    theta_rate,
    to_polar,
)
from .constructor import (
    FastSolution,
    GridFunction,
    TailMode,
    build_fast_solution,
    equation_residual,
    operator_K,
    solve_forced_ode,
)
from .errors import (
    BoundViolationError,
    ConvergenceError,
    DomainError,
    InsufficientDataError,
    InvalidParameterError,
    NumericalError,
    StepSizeError,
    ValidationError,
)
from .integrator import State, Status, Trajectory, integrate, integrate_regularized, locate_zeros, vector_field
from .model import (
    Params,
    Regime,
    alpha_star,
    asymptotic_constants,
    classify_theoretical,
    comparison_bound,
    critical_c0,
    energy,
)
from .regions import PhasePoint, RegionSpec, field_zw, region_certificate, region_invariance_test

__version__ = "0.1.0"

__all__ = [
    "AuditReport", "PolarState", "RateEstimate", "classify_empirical", "energy_audit",
    "fit_decay_exponent", "polar_track", "theta_rate", "to_polar",
    "FastSolution", "GridFunction", "TailMode", "build_fast_solution", "equation_residual",
    "operator_K", "solve_forced_ode",
    "BoundViolationError", "ConvergenceError", "DomainError", "InsufficientDataError",
    "InvalidParameterError", "NumericalError", "StepSizeError", "ValidationError",
    "State", "Status", "Trajectory", "integrate", "integrate_regularized", "locate_zeros", "vector_field",
    "Params", "Regime", "alpha_star", "asymptotic_constants", "classify_theoretical",
    "comparison_bound", "critical_c0", "energy",
    "PhasePoint", "RegionSpec", "field_zw", "region_certificate", "region_invariance_test",
]
