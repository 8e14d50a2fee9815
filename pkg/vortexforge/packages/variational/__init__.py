"""Energy functional, descent minimization, and the mountain-pass search."""
from .descent import (
    DescentConfig,
    PolishResult,
    armijo_step,
    minimize,
    newton_polish,
    newton_step,
)
from .energy import (
    energy,
    energy_gradient,
    energy_hessian,
    hessian_min_eigenvalue,
    translation_gap,
)
from .mountain_pass import (
    MountainPassConfig,
    find_endpoint_shift,
    mountain_pass,
    second_solution_distance,
)

__all__ = [
    "DescentConfig", "PolishResult", "armijo_step", "minimize", "newton_polish", "newton_step",
    "energy", "energy_gradient", "energy_hessian", "hessian_min_eigenvalue", "translation_gap",
    "MountainPassConfig", "find_endpoint_shift", "mountain_pass", "second_solution_distance",
]
