"""
Energy descent: backtracking-Armijo line searches along the Newton direction
(when it is a descent direction) or along −∇I, plus a damped Newton polish.

The Hessian L + diag(μλF′) is badly conditioned once λ is large, and plain
steepest descent then crawls near the minimum. The Newton direction is tried
first; every step, Newton or gradient, passes the same energy test.

Near a minimum the predicted Armijo decrease c·t·‖∇I‖² drops below the
rounding level of I itself. Once that happens the line search accepts a step
on a decrease of ‖∇I‖_∞ instead, still refusing any step that raises the
energy by more than rounding.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse.linalg as spla

from vortexforge.packages.chern_simons import VortexProblem
from vortexforge.packages.errors import (
    DescentError,
    EnergyOverflowError,
    ParameterError,
    VortexForgeError,
)
from vortexforge.packages.events import CorrelationIDs, emit_event
from vortexforge.packages.graph import VertexField
from vortexforge.packages.observability import traced

from .energy import energy, energy_gradient, energy_hessian

ROUNDOFF = 64 * np.finfo(float).eps
MIN_STEP = 1e-20
NEWTON_MIN_STEP = 1e-8


@dataclass(frozen=True)
class DescentConfig:
    grad_tol: float = 1e-9
    max_steps: int = 200_000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    init_step: float = 1.0
    newton: bool = True

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ParameterError(f"grad_tol must be > 0, got {self.grad_tol}")
        if self.max_steps < 1:
            raise ParameterError(f"max_steps must be >= 1, got {self.max_steps}")
        if not 0 < self.armijo_c < 1:
            raise ParameterError(f"armijo_c must be in (0, 1), got {self.armijo_c}")
        if not 0 < self.backtrack < 1:
            raise ParameterError(f"backtrack must be in (0, 1), got {self.backtrack}")
        if not self.init_step > 0:
            raise ParameterError(f"init_step must be > 0, got {self.init_step}")

    def to_dict(self) -> dict:
        return asdict(self)


class ArmijoStep(NamedTuple):
    v: VertexField
    energy: float
    gradient: VertexField
    step: float


def _sup(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def _energy_or_inf(prob: VortexProblem, u0, v) -> float:
    try:
        return energy(prob, u0, v)
    except EnergyOverflowError:
        return float("inf")


def _projected_gradient_norm(v, grad, lower_bound) -> float:
    if lower_bound is None:
        return _sup(grad)
    active = (v <= lower_bound) & (grad > 0)
    return _sup(np.where(active, 0.0, grad))


def armijo_step(
    prob: VortexProblem,
    u0: VertexField,
    v: VertexField,
    e: float,
    grad: VertexField,
    step: float,
    cfg: DescentConfig,
    lower_bound: Optional[VertexField] = None,
) -> Optional[ArmijoStep]:
    """One backtracking step along −∇I (projected onto v ≥ lower_bound); None if none found."""
    scale = ROUNDOFF * (1.0 + abs(e))
    gnorm = _projected_gradient_norm(v, grad, lower_bound)
    t = step
    while t >= MIN_STEP:
        trial = v - t * grad
        if lower_bound is not None:
            trial = np.maximum(trial, lower_bound)
        e_new = _energy_or_inf(prob, u0, trial)
        predicted = cfg.armijo_c * float(np.dot(grad, trial - v))
        if e_new <= e + predicted:
            return ArmijoStep(trial, e_new, energy_gradient(prob, u0, trial), t)
        if -predicted < scale and e_new <= e + scale:
            g_new = energy_gradient(prob, u0, trial)
            if _projected_gradient_norm(trial, g_new, lower_bound) < gnorm:
                return ArmijoStep(trial, e_new, g_new, t)
        t *= cfg.backtrack
    return None


def newton_step(
    prob: VortexProblem,
    u0: VertexField,
    v: VertexField,
    e: float,
    grad: VertexField,
    cfg: DescentConfig,
    lower_bound: Optional[VertexField] = None,
) -> Optional[ArmijoStep]:
    """
    One backtracking step along the Newton direction −H⁻¹∇I on the free vertices.

    Vertices held at lower_bound with the gradient pushing down stay fixed.
    None when the direction is not a descent direction or no step passes.
    """
    free = np.ones(len(v), dtype=bool)
    if lower_bound is not None:
        free = ~((v <= lower_bound) & (grad > 0))
    idx = np.flatnonzero(free)
    if idx.size == 0:
        return None
    h = energy_hessian(prob, u0, v).tocsc()
    if idx.size < len(v):
        h = h[idx][:, idx]
    try:
        d_free = spla.spsolve(h.tocsc(), -grad[idx])
    except RuntimeError:
        return None
    direction = np.zeros_like(v)
    direction[idx] = np.atleast_1d(d_free)
    if not np.all(np.isfinite(direction)) or not float(np.dot(grad, direction)) < 0:
        return None

    scale = ROUNDOFF * (1.0 + abs(e))
    gnorm = _projected_gradient_norm(v, grad, lower_bound)
    t = 1.0
    while t >= NEWTON_MIN_STEP:
        trial = v + t * direction
        if lower_bound is not None:
            trial = np.maximum(trial, lower_bound)
        e_new = _energy_or_inf(prob, u0, trial)
        if e_new <= e + cfg.armijo_c * float(np.dot(grad, trial - v)):
            return ArmijoStep(trial, e_new, energy_gradient(prob, u0, trial), t)
        if e_new <= e + scale:
            g_new = energy_gradient(prob, u0, trial)
            if _projected_gradient_norm(trial, g_new, lower_bound) < gnorm:
                return ArmijoStep(trial, e_new, g_new, t)
        t *= cfg.backtrack
    return None


@traced
def minimize(
    prob: VortexProblem,
    u0,
    start,
    cfg: Optional[DescentConfig] = None,
    *,
    lower_bound=None,
    correlation: Optional[CorrelationIDs] = None,
) -> tuple[VertexField, float]:
    """
    Line-search descent from start: Newton steps where they decrease I,
    backtracking-Armijo gradient steps otherwise (or always, with newton=False).

    Returns (v*, I(v*)) with ‖∇I(v*)‖_∞ ≤ grad_tol. With lower_bound the
    descent is projected onto {v ≥ lower_bound} and the stopping test uses the
    projected gradient.
    """
    cfg = cfg or DescentConfig()
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    v = g.check_field(start, "start").copy()
    if lower_bound is not None:
        lower_bound = g.check_field(lower_bound, "lower_bound")
        v = np.maximum(v, lower_bound)
    e = energy(prob, u0, v)
    grad = energy_gradient(prob, u0, v)
    step = cfg.init_step
    newton_steps = 0
    start_time = time.monotonic()

    for k in range(cfg.max_steps + 1):
        gnorm = _projected_gradient_norm(v, grad, lower_bound)
        if gnorm <= cfg.grad_tol:
            emit_event("descent.completed", "variational", correlation,
                       payload={"lambda": prob.lam, "steps": k, "newton_steps": newton_steps,
                                "energy": e, "grad_norm": gnorm},
                       duration_ms=int((time.monotonic() - start_time) * 1000))
            return v, e
        if k == cfg.max_steps:
            break
        accepted = newton_step(prob, u0, v, e, grad, cfg, lower_bound) if cfg.newton else None
        newton_taken = accepted is not None
        if accepted is None:
            accepted = armijo_step(prob, u0, v, e, grad, step, cfg, lower_bound)
        if accepted is None:
            raise DescentError("line search found no acceptable step", v, gnorm, k)
        if accepted.energy > e + ROUNDOFF * (1.0 + abs(e)):
            raise DescentError(f"energy increased at step {k}", v, gnorm, k)
        v, e, grad = accepted.v, accepted.energy, accepted.gradient
        newton_steps += newton_taken
        if not newton_taken:
            # retry a larger step next time when the first trial was accepted
            step = min(cfg.init_step, accepted.step / cfg.backtrack) \
                if accepted.step == step else accepted.step

    raise DescentError(f"descent budget of {cfg.max_steps} steps exhausted", v,
                       _projected_gradient_norm(v, grad, lower_bound), cfg.max_steps)


class PolishResult(NamedTuple):
    v: VertexField
    converged: bool
    grad_norm: float


def newton_polish(prob: VortexProblem, u0, v, tol: float = 1e-12,
                  max_iter: int = 50) -> PolishResult:
    """Damped Newton on ∇I = 0 with merit ‖∇I‖₂; finds minima and saddles alike."""
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    v = g.check_field(v, "v").copy()
    grad = energy_gradient(prob, u0, v)
    for _ in range(max_iter):
        gnorm = _sup(grad)
        if gnorm <= tol:
            return PolishResult(v, True, gnorm)
        try:
            direction = spla.spsolve(energy_hessian(prob, u0, v).tocsc(), -grad)
        except (RuntimeError, VortexForgeError):
            return PolishResult(v, False, gnorm)
        if not np.all(np.isfinite(direction)):
            return PolishResult(v, False, gnorm)
        merit = float(np.dot(grad, grad))
        t = 1.0
        while t >= 1e-8:
            trial = v + t * direction
            try:
                g_trial = energy_gradient(prob, u0, trial)
            except VortexForgeError:
                g_trial = None
            if g_trial is not None and np.all(np.isfinite(g_trial)) \
                    and float(np.dot(g_trial, g_trial)) < merit:
                v, grad = trial, g_trial
                break
            t *= 0.5
        else:
            return PolishResult(v, False, gnorm)
    gnorm = _sup(grad)
    return PolishResult(v, gnorm <= tol, gnorm)
