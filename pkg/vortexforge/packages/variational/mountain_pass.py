"""
Numerical mountain-pass search for a second solution.

The path starts as the segment from the local minimizer v_min to v_min − c₀,
where c₀ is doubled until I(v_min − c₀) ≤ I(v_min) − 1. Each deformation step
moves every interior node against the part of ∇I normal to the path, and the
highest node against the reflected gradient ∇I − 2⟨∇I, τ⟩τ, so it climbs along
the path while descending across it. The step is explicit, with the length
0.5 / (2·max deg + max μλ|F′|) from a Gershgorin bound on the Hessian. Nodes
are re-spaced by arc length whenever the path stretches.

The top node is handed to damped Newton on the first step, every
polish_every steps, once it is nearly critical, and when it first comes within
polish_tol of a critical point. A polished point is accepted only if it is a
genuine, distinct solution above the minimizer's energy.

If v_min is not a strict local minimum there may be a continuum of solutions
through it; the path then sinks to the minimizer's level and the search
reports stalled rather than trying to detect the continuum.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from vortexforge.packages.chern_simons import (
    SolveReport,
    SolveStatus,
    VortexProblem,
    nonlinearity_F_prime,
    residual_reduced,
)
from vortexforge.packages.errors import ConvergenceError, ParameterError
from vortexforge.packages.events import CorrelationIDs, emit_event
from vortexforge.packages.graph import VertexField
from vortexforge.packages.observability import traced

from .descent import ROUNDOFF, DescentConfig, _energy_or_inf, newton_polish
from .energy import energy, energy_gradient, hessian_min_eigenvalue

ENDPOINT_DROP = 1.0
MAX_DOUBLINGS = 64
STRETCH_LIMIT = 2.0


@dataclass(frozen=True)
class MountainPassConfig:
    path_points: int = 51
    deform_tol: float = 1e-7
    max_deform: int = 50_000
    c0_search: float = 1.0
    polish_tol: float = 1e-3
    polish_every: int = 25
    distinct_factor: float = 1e3
    residual_tol: float = 1e-8

    def __post_init__(self):
        if self.path_points < 3:
            raise ParameterError(f"path_points must be >= 3, got {self.path_points}")
        for name in ("deform_tol", "c0_search", "polish_tol", "distinct_factor", "residual_tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.max_deform < 1 or self.polish_every < 1:
            raise ParameterError("max_deform and polish_every must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def find_endpoint_shift(prob: VortexProblem, u0, v_min, c0: float = 1.0,
                        drop: float = ENDPOINT_DROP) -> float:
    """Smallest c₀ = c0·2^j with I(v_min − c₀) ≤ I(v_min) − drop."""
    target = energy(prob, u0, v_min) - drop
    for _ in range(MAX_DOUBLINGS):
        if energy(prob, u0, v_min - c0) <= target:
            return c0
        c0 *= 2.0
    raise ConvergenceError(f"no endpoint with energy drop {drop} up to c0 = {c0:.3g}",
                           residual=float("nan"), iterations=MAX_DOUBLINGS)


def _respace(path: np.ndarray) -> np.ndarray:
    """Redistribute nodes uniformly by arc length along the polyline; endpoints fixed."""
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    if arc[-1] == 0.0:
        return path
    targets = np.linspace(0.0, arc[-1], len(path))
    idx = np.clip(np.searchsorted(arc, targets, side="right") - 1, 0, len(seg) - 1)
    frac = np.where(seg[idx] > 0, (targets - arc[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0), 0.0)
    out = path[idx] + frac[:, None] * (path[idx + 1] - path[idx])
    out[0], out[-1] = path[0], path[-1]
    return out


def _stretched(path: np.ndarray) -> bool:
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    return bool(seg.max() > STRETCH_LIMIT * seg.mean())


def _tangents(path: np.ndarray) -> np.ndarray:
    """Unit central-difference tangents at the interior nodes."""
    tau = path[2:] - path[:-2]
    norms = np.linalg.norm(tau, axis=1)
    return tau / np.where(norms > 0, norms, 1.0)[:, None]


def string_forces(grads: np.ndarray, tangents: np.ndarray, climbing: int) -> np.ndarray:
    """
    Normal part of ∇I at every interior node; at the climbing node the
    component along the path is reversed instead of removed.
    """
    along = np.sum(grads * tangents, axis=1)
    forces = grads - along[:, None] * tangents
    forces[climbing] = grads[climbing] - 2.0 * along[climbing] * tangents[climbing]
    return forces


def explicit_step(prob: VortexProblem, u0, nodes: np.ndarray) -> float:
    g = prob.graph
    with np.errstate(over="ignore", invalid="ignore"):
        curvature = np.abs(g.mu * prob.lam * nonlinearity_F_prime(u0[None, :] + nodes))
    bound = 2.0 * float(g.degree.max()) + float(np.nanmax(curvature))
    return 0.5 / bound


@traced
def mountain_pass(
    prob: VortexProblem,
    u0,
    v_min,
    cfg: Optional[MountainPassConfig] = None,
    dcfg: Optional[DescentConfig] = None,
    *,
    correlation: Optional[CorrelationIDs] = None,
) -> SolveReport:
    """Search for a second solution above the local minimizer v_min."""
    cfg = cfg or MountainPassConfig()
    dcfg = dcfg or DescentConfig()
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    v_min = g.check_field(v_min, "v_min")
    g_min = float(np.max(np.abs(energy_gradient(prob, u0, v_min))))
    if g_min > dcfg.grad_tol:
        raise ParameterError(
            f"v_min is not a certified critical point: gradient {g_min:.3e} > {dcfg.grad_tol:.3e}"
        )

    start = time.monotonic()
    e_min = energy(prob, u0, v_min)
    curvature = hessian_min_eigenvalue(prob, u0, v_min)
    c0 = find_endpoint_shift(prob, u0, v_min, cfg.c0_search)
    ts = np.linspace(0.0, 1.0, cfg.path_points)
    path = v_min[None, :] - ts[:, None] * c0
    energies = np.array([energy(prob, u0, p) for p in path])
    distinct = cfg.distinct_factor * cfg.deform_tol
    floor = e_min + ROUNDOFF * (1.0 + abs(e_min))
    polish_grad_tol = 0.1 * cfg.residual_tol * float(g.mu.min())

    report = SolveReport(status=SolveStatus.STALLED, iterations=0, kind="mountain_pass")
    was_near = False
    for it in range(1, cfg.max_deform + 1):
        report.iterations = it
        climbing = int(np.argmax(energies[1:-1]))
        k = climbing + 1
        e_k = float(energies[k])
        grads = np.array([energy_gradient(prob, u0, p) for p in path[1:-1]])
        gnorm = float(np.max(np.abs(grads[climbing])))
        report.energy_trace.append(e_k)
        report.residual_history.append(gnorm)

        if e_k <= floor:
            report.message = "path collapsed onto the local minimizer"
            break

        near = gnorm <= cfg.polish_tol
        if it == 1 or it % cfg.polish_every == 0 or gnorm <= cfg.deform_tol \
                or (near and not was_near):
            polished = newton_polish(prob, u0, path[k], tol=polish_grad_tol)
            if polished.converged:
                v2 = polished.v
                res = float(np.max(np.abs(residual_reduced(prob, u0, v2))))
                e2 = energy(prob, u0, v2)
                gap = float(np.max(np.abs(v2 - v_min)))
                if res <= cfg.residual_tol and gap > distinct and e2 > e_min:
                    report.status = SolveStatus.CONVERGED
                    report.solution_v = v2
                    report.energy = e2
                    report.energy_gap = e2 - e_min
                    report.residual_history.append(res)
                    break
            if gnorm <= cfg.deform_tol:
                report.message = "critical point on the path is not a distinct solution"
                break
        was_near = near

        h = explicit_step(prob, u0, path[1:-1])
        if not h > 0:
            report.message = "path left the region where the Hessian is bounded"
            break
        path[1:-1] -= h * string_forces(grads, _tangents(path), climbing)
        if _stretched(path):
            path = _respace(path)
        energies[1:-1] = [_energy_or_inf(prob, u0, p) for p in path[1:-1]]
        if not np.all(np.isfinite(energies)):
            report.message = "energy overflowed along the path"
            break
    else:
        report.message = f"deformation budget of {cfg.max_deform} steps exhausted"

    if not report.converged and curvature <= 0:
        report.message += f"; minimizer Hessian is not positive definite ({curvature:.3e})"
    report.duration_ms = int((time.monotonic() - start) * 1000)
    emit_event("mountain_pass.completed", "variational", correlation,
               payload={"lambda": prob.lam, "c0": c0, "min_curvature": curvature,
                        "energy_min": e_min, **report.summary(),
                        "energy_gap": report.energy_gap, "message": report.message},
               duration_ms=report.duration_ms)
    return report


def second_solution_distance(v_min: VertexField, report: SolveReport) -> Optional[float]:
    if report.solution_v is None:
        return None
    return float(np.max(np.abs(report.solution_v - v_min)))
