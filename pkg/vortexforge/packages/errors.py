"""
Error hierarchy for vortexforge.

Every error renders to a flat dict so the CLI can print one machine-parsable
JSON line on stderr.
"""
from __future__ import annotations

from typing import Any, Optional


class VortexForgeError(Exception):
    """Base class for all vortexforge failures."""

    def details(self) -> dict[str, Any]:
        return {}

    def to_dict(self) -> dict[str, Any]:
        d = {"error": type(self).__name__, "message": str(self)}
        d.update(self.details())
        return d


class GraphError(VortexForgeError, ValueError):
    """Invalid graph data: bad edges, weights, measure or vertex index."""


class FieldAlignmentError(GraphError):
    """A vertex field does not match its graph (length or non-finite entries)."""


class DisconnectedGraphError(GraphError):
    """The operation needs a connected graph."""


class ParameterError(VortexForgeError, ValueError):
    """A numeric parameter or config value is out of range."""


class CompatibilityError(VortexForgeError, ValueError):
    """Right-hand side of the singular Poisson system is not mean-zero."""

    def __init__(self, message: str, integral: float):
        super().__init__(message)
        self.integral = integral

    def details(self) -> dict[str, Any]:
        return {"integral": self.integral}


class ConvergenceError(VortexForgeError, RuntimeError):
    """An iterative procedure ran out of budget."""

    def __init__(self, message: str, residual: float, iterations: Optional[int] = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations

    def details(self) -> dict[str, Any]:
        return {"residual": self.residual, "iterations": self.iterations}


class DescentError(ConvergenceError):
    """Energy descent failed; keeps the last iterate for inspection."""

    def __init__(self, message: str, last_iterate, grad_norm: float, iterations: int):
        super().__init__(message, residual=grad_norm, iterations=iterations)
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm

    def details(self) -> dict[str, Any]:
        return {"grad_norm": self.grad_norm, "iterations": self.iterations}


class EnergyOverflowError(VortexForgeError, OverflowError):
    """The sixth-power term of the energy saturated the float range."""


class CriticalSearchError(VortexForgeError, RuntimeError):
    """No converged probe was found below the search cap."""

    def __init__(self, message: str, probes: list):
        super().__init__(message)
        self.probes = probes

    def details(self) -> dict[str, Any]:
        return {"probes": [p.summary() for p in self.probes]}
