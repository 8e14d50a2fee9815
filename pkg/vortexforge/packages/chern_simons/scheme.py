"""
Monotone iterative scheme for the reduced equation.

    (Δ − K) W_n = λF(u₀ + W_{n−1}) − K W_{n−1} + 4πN/Vol(V),   W₀ = −u₀,  K ≥ λ

The iterates are pointwise non-increasing and bounded below by any
subsolution; if they stay bounded they converge to the maximal solution.
Every step is checked at runtime: a violation of the monotone chain or of a
supplied lower barrier is recorded on the report and emitted as an event.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from vortexforge.packages.errors import CompatibilityError, ParameterError
from vortexforge.packages.events import CorrelationIDs, emit_event
from vortexforge.packages.graph import VertexField, integrate, laplacian_apply
from vortexforge.packages.linear import LinearSolveConfig, ShiftedSolver, solve_poisson_mean_zero
from vortexforge.packages.observability import traced

from .problem import FOUR_PI, VortexProblem, nonlinearity_F, safe_exp

U0_COMPAT_TOL = 1e-12
SUBSOLUTION_SLACK = 1e-12
BARRIER_TOL = 1e-8


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    STALLED = "stalled"


@dataclass(frozen=True)
class SchemeConfig:
    """
    Controls for monotone_iterate.

    K None means K = λ. Divergence is declared when min W_n drops below
    divergence_floor, or when the sup-norm step stays at least
    stall_fraction·4πN/(K·Vol(V)) and non-decreasing for stall_window steps.
    """
    K: Optional[float] = None
    residual_tol: float = 1e-10
    max_iter: int = 100_000
    divergence_floor: float = -1e3
    stall_window: int = 50
    stall_fraction: float = 0.5
    monotone_tol: float = 1e-10

    def __post_init__(self):
        if self.K is not None and not self.K > 0:
            raise ParameterError(f"K must be > 0, got {self.K}")
        if not self.residual_tol > 0:
            raise ParameterError(f"residual_tol must be > 0, got {self.residual_tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.stall_window < 1:
            raise ParameterError(f"stall_window must be >= 1, got {self.stall_window}")
        if not self.divergence_floor < 0:
            raise ParameterError(f"divergence_floor must be < 0, got {self.divergence_floor}")
        if not self.stall_fraction > 0:
            raise ParameterError(f"stall_fraction must be > 0, got {self.stall_fraction}")

    def resolve_shift(self, lam: float) -> float:
        K = lam if self.K is None else self.K
        if K < lam:
            raise ParameterError(f"monotone scheme needs K >= lambda, got K={K} < lambda={lam}")
        return float(K)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveReport:
    """Outcome of one solve: the solution, or the evidence for giving up."""
    status: SolveStatus
    iterations: int
    solution_v: Optional[VertexField] = None
    residual_history: list[float] = field(default_factory=list)
    monotonicity_certified: bool = True
    min_value_trace: list[float] = field(default_factory=list)
    kind: str = "maximal"
    energy: Optional[float] = None
    energy_gap: Optional[float] = None
    barrier_certified: Optional[bool] = None
    energy_trace: list[float] = field(default_factory=list)
    divergence_reason: Optional[str] = None
    message: str = ""
    duration_ms: int = 0

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    @property
    def final_residual(self) -> Optional[float]:
        return self.residual_history[-1] if self.residual_history else None

    def summary(self) -> dict:
        """Compact form without the traces or the solution."""
        return {
            "status": self.status.value,
            "kind": self.kind,
            "iterations": self.iterations,
            "residual": self.final_residual,
            "min_value": self.min_value_trace[-1] if self.min_value_trace else None,
            "monotonicity_certified": self.monotonicity_certified,
            "divergence_reason": self.divergence_reason,
        }

    def to_dict(self) -> dict:
        d = self.summary()
        d.update({
            "v": None if self.solution_v is None else [float(x) for x in self.solution_v],
            "residual_history": self.residual_history,
            "min_value_trace": self.min_value_trace,
            "energy": self.energy,
            "energy_gap": self.energy_gap,
            "barrier_certified": self.barrier_certified,
            "energy_trace": self.energy_trace,
            "message": self.message,
        })
        return d


def _sup(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def compute_u0(prob: VortexProblem, cfg: Optional[LinearSolveConfig] = None,
               correlation: Optional[CorrelationIDs] = None) -> VertexField:
    """Mean-zero u₀ with Δu₀ = −4πN/Vol(V) + 4π Σ n_s δ_{p_s}."""
    g = prob.graph
    rhs = FOUR_PI * prob.vortex_source() - prob.source_density
    total = integrate(g, rhs)
    if abs(total) > U0_COMPAT_TOL * g.volume() * (1.0 + _sup(rhs)):
        raise CompatibilityError(f"vortex source is not mean-zero: {total:.3e}", integral=total)
    u0 = solve_poisson_mean_zero(g, rhs, cfg)
    emit_event("u0.computed", "chern_simons", correlation,
               payload={"graph_hash": g.graph_hash(), "N": prob.N, "max_u0": float(u0.max())})
    return u0


def residual_reduced(prob: VortexProblem, u0, v) -> VertexField:
    """Δv − λF(u₀ + v) − 4πN/Vol(V); zero exactly at solutions of the reduced equation."""
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    v = g.check_field(v, "v")
    return laplacian_apply(g, v) - prob.lam * nonlinearity_F(u0 + v) - prob.source_density


def is_subsolution(prob: VortexProblem, u0, w, slack: float = SUBSOLUTION_SLACK) -> bool:
    """Δw ≥ λF(u₀ + w) + 4πN/Vol(V) at every vertex, up to slack."""
    return bool(np.all(residual_reduced(prob, u0, w) >= -slack))


def constant_subsolution(prob: VortexProblem, u0, q0: Optional[float] = None) -> VertexField:
    """Ŵ₋ ≡ −Q₀ with Q₀ > max u₀; a subsolution once λ ≥ subsolution_lambda."""
    u0 = prob.graph.check_field(u0, "u0")
    q0 = float(u0.max()) + 1.0 if q0 is None else float(q0)
    if not q0 > u0.max():
        raise ParameterError(f"Q0 must exceed max u0 = {u0.max():.6g}, got {q0}")
    return np.full(prob.graph.n, -q0)


def subsolution_lambda(prob: VortexProblem, u0, q0: Optional[float] = None) -> float:
    """
    Smallest λ making Ŵ₋ ≡ −Q₀ a subsolution.

    Solvability for every λ at or above this value is certified by the lower
    barrier, so it is an upper bound for the critical coupling.
    """
    w = constant_subsolution(prob, u0, q0)
    s = safe_exp(u0 + w)
    drop = float(np.min(s * (1.0 - s) ** 5))
    if drop <= 0:
        raise ParameterError("Q0 too large: e^(u0 - Q0) underflows at some vertex")
    return prob.source_density / drop


@traced
def monotone_iterate(
    prob: VortexProblem,
    u0,
    cfg: Optional[SchemeConfig] = None,
    *,
    subsolution=None,
    linear_cfg: Optional[LinearSolveConfig] = None,
    correlation: Optional[CorrelationIDs] = None,
) -> SolveReport:
    """Run the monotone scheme from W₀ = −u₀; converged output is the maximal solution."""
    cfg = cfg or SchemeConfig()
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    K = cfg.resolve_shift(prob.lam)
    barrier = None
    if subsolution is not None:
        barrier = g.check_field(subsolution, "subsolution")
        if not is_subsolution(prob, u0, barrier):
            raise ParameterError("supplied lower barrier is not a subsolution")

    start = time.monotonic()
    solver = ShiftedSolver(g, K, linear_cfg)
    c = prob.source_density
    stall_step = cfg.stall_fraction * c / K

    w_prev = -u0
    report = SolveReport(status=SolveStatus.STALLED, iterations=0,
                         barrier_certified=None if barrier is None else True)
    prev_step = 0.0
    growing = 0
    for n in range(1, cfg.max_iter + 1):
        rhs = prob.lam * nonlinearity_F(u0 + w_prev) - K * w_prev + c
        w = solver.solve(rhs)
        report.iterations = n

        slack = cfg.monotone_tol
        if report.monotonicity_certified and np.any(w > w_prev + slack):
            report.monotonicity_certified = False
            emit_event("scheme.invariant_violated", "chern_simons", correlation,
                       severity="warning",
                       payload={"invariant": "monotone_chain", "iteration": n,
                                "excess": float(np.max(w - w_prev))})
        if report.barrier_certified and np.any(w < barrier - BARRIER_TOL):
            report.barrier_certified = False
            emit_event("scheme.invariant_violated", "chern_simons", correlation,
                       severity="warning",
                       payload={"invariant": "lower_barrier", "iteration": n,
                                "deficit": float(np.max(barrier - w))})

        res = _sup(residual_reduced(prob, u0, w))
        report.residual_history.append(res)
        report.min_value_trace.append(float(w.min()))
        step = float(np.max(w_prev - w))

        if res <= cfg.residual_tol:
            report.status = SolveStatus.CONVERGED
            report.solution_v = w
            break
        if w.min() < cfg.divergence_floor:
            report.status = SolveStatus.DIVERGED
            report.divergence_reason = "floor"
            break
        growing = growing + 1 if step >= stall_step and step >= prev_step * (1 - 1e-12) else 0
        if growing >= cfg.stall_window:
            report.status = SolveStatus.DIVERGED
            report.divergence_reason = "unbounded_drift"
            break
        prev_step = step
        w_prev = w

    report.duration_ms = int((time.monotonic() - start) * 1000)
    emit_event("scheme.completed", "chern_simons", correlation,
               payload={"lambda": prob.lam, "K": K, **report.summary()},
               duration_ms=report.duration_ms)
    return report


@dataclass
class MonotonicityComparison:
    """Pointwise comparison of maximal solutions at two couplings."""
    lambda_hi: float
    lambda_lo: float
    applicable: bool
    holds: Optional[bool]
    max_violation: Optional[float]
    status_hi: SolveStatus
    status_lo: SolveStatus

    def __bool__(self) -> bool:
        return bool(self.holds)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status_hi"] = self.status_hi.value
        d["status_lo"] = self.status_lo.value
        return d


def compare_lambda_monotonicity(
    prob_hi: VortexProblem,
    prob_lo: VortexProblem,
    cfg: Optional[SchemeConfig] = None,
    linear_cfg: Optional[LinearSolveConfig] = None,
    tol: float = 1e-8,
) -> MonotonicityComparison:
    """Check v_{λ_lo} ≤ v_{λ_hi} + tol for the maximal solutions (λ_hi ≥ λ_lo)."""
    same_graph = prob_hi.graph is prob_lo.graph \
        or prob_hi.graph.graph_hash() == prob_lo.graph.graph_hash()
    if not same_graph:
        raise ParameterError("comparison needs the same graph at both couplings")
    if prob_hi.vortices != prob_lo.vortices:
        raise ParameterError("comparison needs the same vortices at both couplings")
    if prob_hi.lam < prob_lo.lam:
        raise ParameterError(f"expected lambda_hi >= lambda_lo, got {prob_hi.lam} < {prob_lo.lam}")

    u0 = compute_u0(prob_hi, linear_cfg)
    hi = monotone_iterate(prob_hi, u0, cfg, linear_cfg=linear_cfg)
    lo = hi if prob_hi.lam == prob_lo.lam \
        else monotone_iterate(prob_lo, u0, cfg, linear_cfg=linear_cfg)
    if not (hi.converged and lo.converged):
        return MonotonicityComparison(prob_hi.lam, prob_lo.lam, False, None, None,
                                      hi.status, lo.status)
    excess = float(np.max(lo.solution_v - hi.solution_v))
    return MonotonicityComparison(prob_hi.lam, prob_lo.lam, True, excess <= tol, excess,
                                  hi.status, lo.status)


def solution_payload(prob: VortexProblem, u0, report: SolveReport) -> dict:
    """Solution JSON object for one report."""
    return {
        **prob.to_dict(),
        "kind": report.kind,
        "status": report.status.value,
        "iterations": report.iterations,
        "residual": report.final_residual,
        "u0": [float(x) for x in u0],
        "v": None if report.solution_v is None else [float(x) for x in report.solution_v],
        "energy": report.energy,
        "energy_gap": report.energy_gap,
        "monotonicity_certified": report.monotonicity_certified,
        "divergence_reason": report.divergence_reason,
        "min_value_trace": report.min_value_trace,
    }
