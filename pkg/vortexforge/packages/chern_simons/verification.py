"""Structured pass/fail checks for a candidate solution u = u₀ + v of the full equation."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from vortexforge.packages.graph import integrate, laplacian_apply

from .problem import FOUR_PI, VortexProblem, nonlinearity_F


@dataclass
class VerificationCheck:
    name: str
    passed: bool
    value: float
    tolerance: float


@dataclass
class VerificationReport:
    checks: list[VerificationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> VerificationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def verify_solution(prob: VortexProblem, u, tol: float = 1e-8,
                    identity_tol: float = 1e-8) -> VerificationReport:
    """
    Check the three properties every solution must have:

      equation_residual  ‖Δu − λF(u) − 4πΣ n_s δ_{p_s}‖_∞ ≤ tol
      negativity         max u < 0
      integral_identity  |λ∫F(u) dμ + 4πN| ≤ identity_tol
    """
    g = prob.graph
    u = g.check_field(u, "u")
    fu = nonlinearity_F(u)
    residual = laplacian_apply(g, u) - prob.lam * fu - FOUR_PI * prob.vortex_source()
    res = float(np.max(np.abs(residual)))
    identity = abs(prob.lam * integrate(g, fu) + FOUR_PI * prob.N)
    top = float(np.max(u))
    return VerificationReport(checks=[
        VerificationCheck("equation_residual", res <= tol, res, tol),
        VerificationCheck("negativity", top < 0.0, top, 0.0),
        VerificationCheck("integral_identity", identity <= identity_tol, identity, identity_tol),
    ])
