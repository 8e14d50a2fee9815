"""
Bisection bracketing of the critical coupling.

The solvable set of couplings is an interval [λ̂, ∞) bounded below by the
necessary bound (6⁶/5⁵)·4πN/Vol(V). Every probe runs the monotone scheme from
scratch; "no solution" at a probe is only the scheme's operational
divergence verdict, so the result is a numerical bracket, never a point value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from vortexforge.packages.chern_simons import (
    SchemeConfig,
    SolveReport,
    SolveStatus,
    VortexProblem,
    compute_u0,
    monotone_iterate,
    necessary_lambda_bound,
    subsolution_lambda,
    verify_solution,
)
from vortexforge.packages.errors import CriticalSearchError, ParameterError
from vortexforge.packages.events import CorrelationIDs, emit_event
from vortexforge.packages.graph import WeightedGraph
from vortexforge.packages.linear import LinearSolveConfig
from vortexforge.packages.observability import traced

SEED_EPS = 1e-6
CAP_FACTOR = 1e6


@dataclass
class Probe:
    lam: float
    report: SolveReport

    def summary(self) -> dict:
        return {"lambda": self.lam, **self.report.summary()}


@dataclass
class CriticalEstimate:
    """Numerical bracket [lambda_lo, lambda_hi] for the critical coupling."""
    lambda_lo: float
    lambda_hi: float
    bound: float
    upper_bound: float
    rel_width: float
    probes: list[Probe] = field(default_factory=list)
    lo_certified: bool = True
    interval_consistent: bool = True
    hi_verified: Optional[bool] = None

    @property
    def relative_width(self) -> float:
        return (self.lambda_hi - self.lambda_lo) / self.lambda_hi

    def probe_at(self, lam: float) -> Probe:
        for p in self.probes:
            if p.lam == lam:
                return p
        raise KeyError(lam)

    def to_dict(self) -> dict:
        lo = self.probe_at(self.lambda_lo).report
        return {
            "estimate": "numerical bracket",
            "lambda_lo": self.lambda_lo,
            "lambda_hi": self.lambda_hi,
            "bound": self.bound,
            "upper_bound": self.upper_bound,
            "rel_width": self.rel_width,
            "relative_width": self.relative_width,
            "lo_certified": self.lo_certified,
            "interval_consistent": self.interval_consistent,
            "hi_verified": self.hi_verified,
            "lo_min_value_trace": lo.min_value_trace,
            "probes": [p.summary() for p in self.probes],
        }


def interval_consistent(probes: Iterable[Probe]) -> bool:
    """No converged probe lies below a probe that failed to converge."""
    ordered = sorted(probes, key=lambda p: p.lam)
    seen_converged = False
    for p in ordered:
        if p.report.converged:
            seen_converged = True
        elif seen_converged:
            return False
    return True


def _probe_config(cfg: SchemeConfig, lam: float) -> SchemeConfig:
    if cfg.K is not None and cfg.K < lam:
        return replace(cfg, K=lam)
    return cfg


@traced
def find_critical_lambda(
    graph: WeightedGraph,
    vortices,
    rel_width: float = 1e-3,
    scheme_cfg: Optional[SchemeConfig] = None,
    linear_cfg: Optional[LinearSolveConfig] = None,
    *,
    correlation: Optional[CorrelationIDs] = None,
) -> CriticalEstimate:
    """Bracket the critical coupling to (lambda_hi − lambda_lo)/lambda_hi ≤ rel_width."""
    if not 0 < rel_width < 1:
        raise ParameterError(f"rel_width must be in (0, 1), got {rel_width}")
    scheme_cfg = scheme_cfg or SchemeConfig()
    correlation = correlation or CorrelationIDs()
    base = VortexProblem(graph, 1.0, vortices)
    bound = necessary_lambda_bound(base)
    u0 = compute_u0(base, linear_cfg, correlation)
    probes: list[Probe] = []

    def probe(lam: float) -> Probe:
        report = monotone_iterate(
            base.with_lambda(lam), u0, _probe_config(scheme_cfg, lam),
            linear_cfg=linear_cfg, correlation=correlation.child(probe_id=f"lambda={lam!r}"),
        )
        p = Probe(lam, report)
        probes.append(p)
        emit_event("critical.probe", "sweep", correlation, payload=p.summary(),
                   duration_ms=report.duration_ms)
        return p

    # nothing converges below the bound: one seed there, then doubling from 2·bound
    lo = bound * (1.0 - SEED_EPS)
    probe(lo)
    hi: Optional[float] = None
    lam = 2.0 * bound
    while hi is None:
        if lam > CAP_FACTOR * bound:
            raise CriticalSearchError(
                f"no converged probe up to {CAP_FACTOR:g} x bound ({CAP_FACTOR * bound:.6g})",
                probes,
            )
        if probe(lam).report.converged:
            hi = lam
        else:
            lo = lam
            lam *= 2.0

    # bisection in log(lambda)
    while (hi - lo) / hi > rel_width:
        mid = math.sqrt(lo * hi)
        if probe(mid).report.converged:
            hi = mid
        else:
            lo = mid

    estimate = CriticalEstimate(
        lambda_lo=lo,
        lambda_hi=hi,
        bound=bound,
        upper_bound=subsolution_lambda(base, u0),
        rel_width=rel_width,
        probes=probes,
    )
    estimate.lo_certified = estimate.probe_at(lo).report.status is SolveStatus.DIVERGED
    estimate.interval_consistent = interval_consistent(probes)
    hi_report = estimate.probe_at(hi).report
    estimate.hi_verified = verify_solution(base.with_lambda(hi), u0 + hi_report.solution_v).passed
    emit_event("critical.completed", "sweep", correlation,
               payload={k: v for k, v in estimate.to_dict().items()
                        if k not in ("probes", "lo_min_value_trace")})
    return estimate
