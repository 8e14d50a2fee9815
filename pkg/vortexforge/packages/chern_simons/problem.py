"""
Problem data for Δu = λe^u(e^u − 1)^5 + 4π Σ n_s δ_{p_s} on a finite graph.

Substituting u = u₀ + v with Δu₀ = −4πN/Vol(V) + 4πΣ n_s δ_{p_s} leaves the
reduced equation Δv = λF(u₀ + v) + 4πN/Vol(V), F(y) = (e^y − 1)^5 e^y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Union

import numpy as np
from scipy import optimize

from vortexforge.packages.errors import ParameterError
from vortexforge.packages.graph import VertexField, WeightedGraph, dirac_mass

FOUR_PI = 4.0 * math.pi
F_MIN = -(5**5) / 6**6
F_ARGMIN = -math.log(6.0)
BOUND_FACTOR = 6**6 / 5**5
EXP_FLOOR = -700.0

ArrayOrFloat = Union[float, np.ndarray]


def safe_exp(y) -> np.ndarray:
    """e^y with exponents below EXP_FLOOR flushed to exactly 0."""
    y = np.asarray(y, dtype=np.float64)
    return np.where(y < EXP_FLOOR, 0.0, np.exp(np.maximum(y, EXP_FLOOR)))


def _out(y, value: np.ndarray) -> ArrayOrFloat:
    return float(value) if np.ndim(y) == 0 else value


def nonlinearity_F(y) -> ArrayOrFloat:
    """F(y) = (e^y − 1)^5 e^y; tends to 0 as y → −∞."""
    s = safe_exp(y)
    return _out(y, np.expm1(np.asarray(y, dtype=np.float64)) ** 5 * s)


def nonlinearity_F_prime(y) -> ArrayOrFloat:
    """F′(y) = e^y (e^y − 1)^4 (6e^y − 1)."""
    s = safe_exp(y)
    return _out(y, s * np.expm1(np.asarray(y, dtype=np.float64)) ** 4 * (6.0 * s - 1.0))


class FMinimum(NamedTuple):
    y: float
    value: float


def locate_F_minimum(lo: float = -10.0, hi: float = 5.0, points: int = 15001) -> FMinimum:
    """Grid scan, golden-section refinement, then a Brent root of F′ at the minimum."""
    grid = np.linspace(lo, hi, points)
    i = int(np.argmin(nonlinearity_F(grid)))
    i = min(max(i, 1), points - 2)
    golden = optimize.minimize_scalar(
        nonlinearity_F, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden",
        options={"xtol": 1e-12},
    )
    a, b = golden.x - 1e-3, golden.x + 1e-3
    y = optimize.brentq(nonlinearity_F_prime, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return FMinimum(y=float(y), value=float(nonlinearity_F(y)))


def _normalise_vortices(g: WeightedGraph, vortices: Iterable) -> tuple[tuple[int, int], ...]:
    merged: dict[int, int] = {}
    for item in vortices:
        if isinstance(item, (tuple, list)):
            if len(item) != 2:
                raise ParameterError(f"vortex must be p or (p, n), got {item!r}")
            p, mult = item
        else:
            p, mult = item, 1
        p = g.check_vertex(p)
        if isinstance(mult, bool) or int(mult) != mult or mult < 1:
            raise ParameterError(f"vortex multiplicity must be an integer >= 1, got {mult!r}")
        merged[p] = merged.get(p, 0) + int(mult)
    if not merged:
        raise ParameterError("at least one vortex is required (N >= 1)")
    return tuple(sorted(merged.items()))


@dataclass(frozen=True)
class VortexProblem:
    """
    Coupling λ, vortex vertices with multiplicities, and the host graph.

    Repeated vertices are merged into one entry with summed multiplicity;
    all multiplicities 1 is the distinct-vertex setting.
    """
    graph: WeightedGraph
    lam: float
    vortices: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam <= 0:
            raise ParameterError(f"lambda must be finite and > 0, got {self.lam}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "vortices", _normalise_vortices(self.graph, self.vortices))

    @property
    def N(self) -> int:
        return sum(m for _, m in self.vortices)

    @property
    def source_density(self) -> float:
        """4πN/Vol(V)."""
        return FOUR_PI * self.N / self.graph.volume()

    def vortex_source(self) -> VertexField:
        """Σ_s n_s δ_{p_s}."""
        total = np.zeros(self.graph.n)
        for p, mult in self.vortices:
            total += mult * dirac_mass(self.graph, p)
        return total

    def with_lambda(self, lam: float) -> "VortexProblem":
        return replace(self, lam=lam)

    def to_dict(self) -> dict:
        return {
            "graph_hash": self.graph.graph_hash(),
            "lambda": self.lam,
            "vortices": [[p, m] for p, m in self.vortices],
        }


def necessary_lambda_bound(prob: VortexProblem) -> float:
    """(6⁶/5⁵)·4πN/Vol(V): no solution exists for smaller λ."""
    return BOUND_FACTOR * prob.source_density
