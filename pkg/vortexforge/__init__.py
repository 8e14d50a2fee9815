"""vortexforge -- solvers for the generalized self-dual Chern-Simons equation on finite graphs."""
__version__ = "0.1.0"
