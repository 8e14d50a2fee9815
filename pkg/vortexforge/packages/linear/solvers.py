"""
Linear solves for the two systems the schemes need.

  shifted:  (Δ − K) x = b,  K > 0      (one per monotone iteration step)
  Poisson:  Δ x = f,  ∫f dμ = 0        (background function u₀, gauge ∫x dμ = 0)

Both are assembled in symmetric form by multiplying through by μ:
μ(K − Δ) = K·M + L and μ(−Δ) = L, with L = Deg − W.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from vortexforge.packages.errors import (
    CompatibilityError,
    ConvergenceError,
    DisconnectedGraphError,
    ParameterError,
)
from vortexforge.packages.graph import VertexField, WeightedGraph, integrate, laplacian_apply

DIRECT_SIZE_LIMIT = 512
POISSON_COMPAT_TOL = 1e-10


class SolveMethod(str, Enum):
    DIRECT = "direct"
    CONJUGATE_GRADIENT = "conjugate_gradient"


@dataclass(frozen=True)
class LinearSolveConfig:
    """Tolerance and method for the linear solves; method None picks by size."""
    rel_tol: float = 1e-12
    max_iter: Optional[int] = None
    method: Optional[Union[SolveMethod, str]] = None

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.method is not None and not isinstance(self.method, SolveMethod):
            try:
                object.__setattr__(self, "method", SolveMethod(self.method))
            except ValueError:
                raise ParameterError(f"unknown linear solve method {self.method!r}") from None

    def resolve_method(self, n: int) -> SolveMethod:
        if self.method is not None:
            return self.method
        return SolveMethod.DIRECT if n <= DIRECT_SIZE_LIMIT else SolveMethod.CONJUGATE_GRADIENT

    def resolve_max_iter(self, n: int) -> int:
        return self.max_iter if self.max_iter is not None else 10 * n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value if self.method is not None else None
        return d


def _sup(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


class ShiftedSolver:
    """
    Reusable solver for (Δ − K) x = b on one graph.

    The sparse LU factor (or the CG operator) is built once, so a monotone run
    pays for assembly a single time. Instances are not shared across threads.
    """

    def __init__(self, g: WeightedGraph, K: float, cfg: Optional[LinearSolveConfig] = None):
        if not np.isfinite(K) or K <= 0:
            raise ParameterError(f"shift K must be finite and > 0, got {K}")
        self.graph = g
        self.K = float(K)
        self.cfg = cfg or LinearSolveConfig()
        self.method = self.cfg.resolve_method(g.n)
        self._matrix = (self.K * sp.diags(g.mu) + g.combinatorial_laplacian()).tocsc()
        if self.method is SolveMethod.DIRECT:
            self._lu = spla.splu(self._matrix)
        else:
            self._jacobi = sp.diags(1.0 / self._matrix.diagonal())

    def _raw_solve(self, rhs: np.ndarray, x0: Optional[np.ndarray] = None) -> np.ndarray:
        if self.method is SolveMethod.DIRECT:
            return self._lu.solve(rhs)
        x, info = spla.cg(
            self._matrix, rhs, x0=x0, rtol=0.1 * self.cfg.rel_tol, atol=0.0,
            maxiter=self.cfg.resolve_max_iter(self.graph.n), M=self._jacobi,
        )
        if info < 0:
            raise ConvergenceError("conjugate gradient breakdown", residual=float("nan"))
        return x

    def residual(self, x: np.ndarray, b: np.ndarray) -> np.ndarray:
        return laplacian_apply(self.graph, x) - self.K * x - b

    def solve(self, b) -> VertexField:
        b = self.graph.check_field(b, "b")
        tol = self.cfg.rel_tol * (1.0 + _sup(b))
        x = self._raw_solve(-self.graph.mu * b)
        r = self.residual(x, b)
        if _sup(r) > tol:
            # one step of iterative refinement
            x = x - self._raw_solve(-self.graph.mu * r, x0=np.zeros_like(x))
            r = self.residual(x, b)
        res = _sup(r)
        if res > tol:
            raise ConvergenceError(
                f"shifted solve residual {res:.3e} above tolerance {tol:.3e}",
                residual=res, iterations=self.cfg.resolve_max_iter(self.graph.n),
            )
        return x


def solve_shifted(
    g: WeightedGraph, K: float, b, cfg: Optional[LinearSolveConfig] = None
) -> VertexField:
    """Solve (Δ − K) x = b for K > 0; K − Δ is SPD in the μ-inner product."""
    return ShiftedSolver(g, K, cfg).solve(b)


def solve_poisson_mean_zero(
    g: WeightedGraph, f, cfg: Optional[LinearSolveConfig] = None
) -> VertexField:
    """Unique x with Δx = f and ∫x dμ = 0; f must integrate to zero."""
    cfg = cfg or LinearSolveConfig()
    f = g.check_field(f, "f")
    vol = g.volume()
    total = integrate(g, f)
    if abs(total) > POISSON_COMPAT_TOL * vol * (1.0 + _sup(f)):
        raise CompatibilityError(
            f"Poisson data must integrate to zero, got ∫f dμ = {total:.6e}", integral=total
        )
    f = f - total / vol
    rhs = -g.mu * f
    lap = g.combinatorial_laplacian()

    if cfg.resolve_method(g.n) is SolveMethod.DIRECT:
        # one redundant equation replaced by the gauge ∫x dμ = 0
        a = lap.tolil()
        a[0, :] = g.mu
        rhs = rhs.copy()
        rhs[0] = 0.0
        try:
            x = spla.splu(a.tocsc()).solve(rhs)
        except RuntimeError as e:
            raise DisconnectedGraphError(f"Poisson system is singular: {e}") from e
    else:
        ones = np.ones(g.n) / np.sqrt(g.n)

        def project(y: np.ndarray) -> np.ndarray:
            return y - ones * np.dot(ones, y)

        op = spla.LinearOperator(
            lap.shape, matvec=lambda y: project(lap @ project(y)), dtype=np.float64
        )
        x, info = spla.cg(op, project(rhs), rtol=0.1 * cfg.rel_tol, atol=0.0,
                          maxiter=cfg.resolve_max_iter(g.n))
        if info < 0:
            raise ConvergenceError("conjugate gradient breakdown", residual=float("nan"))
        x = x - np.dot(g.mu, x) / vol

    res = _sup(laplacian_apply(g, x) - f)
    tol = cfg.rel_tol * (1.0 + _sup(f))
    if res > tol:
        raise ConvergenceError(
            f"Poisson solve residual {res:.3e} above tolerance {tol:.3e}",
            residual=res, iterations=cfg.resolve_max_iter(g.n),
        )
    return x
