"""
λ-sweeps: one row per coupling with the maximal solution, the energy
minimizer and, on request, the mountain-pass energy gap.

Rows come back in input order whatever the worker count; per-λ failures are
written into the row and never abort the sweep.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from vortexforge.packages.chern_simons import (
    SchemeConfig,
    VortexProblem,
    compute_u0,
    monotone_iterate,
    verify_solution,
)
from vortexforge.packages.errors import ParameterError, VortexForgeError
from vortexforge.packages.events import CorrelationIDs, emit_event
from vortexforge.packages.graph import VertexField, WeightedGraph
from vortexforge.packages.linear import LinearSolveConfig
from vortexforge.packages.observability import traced
from vortexforge.packages.variational import (
    DescentConfig,
    MountainPassConfig,
    energy,
    minimize,
    mountain_pass,
)

SWEEP_COLUMNS = [
    "lambda", "status", "iterations", "residual", "min_u", "energy_maximal", "energy_min",
    "energy_gap", "wall_ms", "max_v", "error",
]


@dataclass
class SweepOptions:
    minimize: bool = True
    mountain: bool = False
    scheme: Optional[SchemeConfig] = None
    descent: Optional[DescentConfig] = None
    mountain_pass: Optional[MountainPassConfig] = None
    linear: Optional[LinearSolveConfig] = None


@dataclass
class SweepRow:
    lam: float
    status: str = "error"
    iterations: Optional[int] = None
    residual: Optional[float] = None
    min_u: Optional[float] = None
    max_u: Optional[float] = None
    energy_maximal: Optional[float] = None
    energy_min: Optional[float] = None
    energy_gap: Optional[float] = None
    wall_ms: Optional[int] = None
    max_v: Optional[float] = None
    verified: Optional[bool] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_csv_row(self, timing: bool = False) -> dict[str, str]:
        values = self.to_dict()
        values["lambda"] = values.pop("lam")
        if not timing:
            values["wall_ms"] = None
        return {col: format_value(values[col]) for col in SWEEP_COLUMNS}


def format_value(value) -> str:
    """17 significant digits for floats, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _record_error(row: SweepRow, e: VortexForgeError) -> None:
    msg = f"{type(e).__name__}: {e}"
    row.error = msg if row.error is None else f"{row.error}; {msg}"


def run_sweep_row(
    graph: WeightedGraph,
    vortices,
    lam: float,
    u0: VertexField,
    options: SweepOptions,
    correlation: Optional[CorrelationIDs] = None,
) -> SweepRow:
    start = time.monotonic()
    row = SweepRow(lam=float(lam))
    try:
        prob = VortexProblem(graph, lam, vortices)
        report = monotone_iterate(prob, u0, options.scheme, linear_cfg=options.linear,
                                  correlation=correlation)
        row.status = report.status.value
        row.iterations = report.iterations
        row.residual = report.final_residual
        if report.converged:
            v = report.solution_v
            u = u0 + v
            row.min_u, row.max_u = float(u.min()), float(u.max())
            row.max_v = float(v.max())
            row.verified = verify_solution(prob, u).passed
            row.energy_maximal = energy(prob, u0, v)
            if options.minimize or options.mountain:
                v_min, row.energy_min = minimize(prob, u0, -u0, options.descent,
                                                 correlation=correlation)
                if options.mountain:
                    mp = mountain_pass(prob, u0, v_min, options.mountain_pass, options.descent,
                                       correlation=correlation)
                    row.energy_gap = mp.energy_gap
    except VortexForgeError as e:
        _record_error(row, e)
    row.wall_ms = int((time.monotonic() - start) * 1000)
    emit_event("sweep.row", "sweep", correlation, payload=row.to_dict(), duration_ms=row.wall_ms)
    return row


@traced
def sweep_lambda(
    graph: WeightedGraph,
    vortices,
    lambdas: Sequence[float],
    options: Optional[SweepOptions] = None,
    *,
    jobs: int = 1,
    correlation: Optional[CorrelationIDs] = None,
) -> list[SweepRow]:
    """One SweepRow per coupling, in input order; deterministic for any jobs value."""
    if jobs < 1:
        raise ParameterError(f"jobs must be >= 1, got {jobs}")
    options = options or SweepOptions()
    correlation = correlation or CorrelationIDs()
    lambdas = [float(x) for x in lambdas]
    if not lambdas:
        return []
    u0 = compute_u0(VortexProblem(graph, 1.0, vortices), options.linear, correlation)

    def work(lam: float) -> SweepRow:
        return run_sweep_row(graph, vortices, lam, u0, options,
                             correlation.child(probe_id=f"lambda={lam!r}"))

    if jobs == 1:
        return [work(lam) for lam in lambdas]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, lambdas))


def converged_upward_closed(rows: Sequence[SweepRow]) -> bool:
    """Converged couplings form an upper set of the probed couplings."""
    seen = False
    for row in sorted(rows, key=lambda r: r.lam):
        if row.status == "converged":
            seen = True
        elif seen:
            return False
    return True


def max_v_monotone(rows: Sequence[SweepRow]) -> bool:
    """max_x v of the maximal solution is non-decreasing in λ over converged rows."""
    values = [r.max_v for r in sorted(rows, key=lambda r: r.lam) if r.status == "converged"]
    return bool(np.all(np.diff(values) >= -1e-8)) if len(values) > 1 else True


def sweep_csv(rows: Sequence[SweepRow], timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_csv_row(timing))
    return buf.getvalue()


def write_sweep_csv(rows: Sequence[SweepRow], path: Union[str, Path], timing: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(sweep_csv(rows, timing), encoding="utf-8")
    return path
