"""Chern-Simons vortex problem, monotone scheme, and solution checks."""
from .problem import (
    BOUND_FACTOR,
    F_ARGMIN,
    F_MIN,
    FOUR_PI,
    FMinimum,
    VortexProblem,
    locate_F_minimum,
    necessary_lambda_bound,
    nonlinearity_F,
    nonlinearity_F_prime,
    safe_exp,
)
from .scheme import (
    MonotonicityComparison,
    SchemeConfig,
    SolveReport,
    SolveStatus,
    compare_lambda_monotonicity,
    compute_u0,
    constant_subsolution,
    is_subsolution,
    monotone_iterate,
    residual_reduced,
    solution_payload,
    subsolution_lambda,
)
from .verification import VerificationCheck, VerificationReport, verify_solution

__all__ = [
    "BOUND_FACTOR", "F_ARGMIN", "F_MIN", "FOUR_PI", "FMinimum", "VortexProblem",
    "locate_F_minimum", "necessary_lambda_bound", "nonlinearity_F", "nonlinearity_F_prime",
    "safe_exp", "MonotonicityComparison", "SchemeConfig", "SolveReport", "SolveStatus",
    "compare_lambda_monotonicity", "compute_u0", "constant_subsolution", "is_subsolution",
    "monotone_iterate", "residual_reduced", "solution_payload", "subsolution_lambda",
    "VerificationCheck", "VerificationReport", "verify_solution",
]
