"""Shifted and singular Poisson solves on weighted graphs."""
from .solvers import (
    LinearSolveConfig,
    ShiftedSolver,
    SolveMethod,
    solve_poisson_mean_zero,
    solve_shifted,
)

__all__ = [
    "LinearSolveConfig", "SolveMethod", "ShiftedSolver", "solve_shifted",
    "solve_poisson_mean_zero",
]
