#!/usr/bin/env python3
"""
VortexForge CLI: build graphs, solve the self-dual Chern-Simons vortex
equation on them, verify solutions, bracket the critical coupling, sweep λ
and search for a second solution.

Usage:
  vortexforge graph --kind torus --m 4 --k 4 -o torus.json
  vortexforge solve torus.json --lambda-factor 4 --vortex 0 [--mode both] [-o sol.json]
  vortexforge verify sol.json --graph torus.json
  vortexforge critical torus.json --vortex 0 [--rel-width 1e-3]
  vortexforge sweep torus.json --vortex 0 --lambda-factor 0.5 --lambda-factor 4 [--jobs 4]
  vortexforge mountain torus.json --vortex 0 --critical-factor 4

Exit codes: 0 converged (or all checks passed), 1 error, 2 diverged,
3 stalled, 4 verification failed. Errors print one JSON line on stderr.
"""
from __future__ import annotations

import functools
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import click

# Ensure vortexforge is importable when run as a script
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from vortexforge.packages.chern_simons import (  # noqa: E402
    SolveReport,
    SolveStatus,
    VortexProblem,
    compute_u0,
    monotone_iterate,
    necessary_lambda_bound,
    solution_payload,
    verify_solution,
)
from vortexforge.packages.errors import (  # noqa: E402
    DescentError,
    ParameterError,
    VortexForgeError,
)
from vortexforge.packages.events import (  # noqa: E402
    CorrelationIDs,
    EventEmitter,
    emit_event,
    new_run_id,
    set_emitter,
)
from vortexforge.packages.graph import (  # noqa: E402
    GraphKind,
    WeightedGraph,
    generate_graph,
    load_graph,
)
from vortexforge.packages.observability import init_tracing  # noqa: E402
from vortexforge.packages.provenance import (  # noqa: E402
    RunManifest,
    sha256_file,
    write_artifact,
    write_text_artifact,
)
from vortexforge.packages.settings import JOBS_ENV, Settings, load_settings  # noqa: E402
from vortexforge.packages.sweep import (  # noqa: E402
    SweepOptions,
    find_critical_lambda,
    sweep_csv,
    sweep_lambda,
)
from vortexforge.packages.variational import (  # noqa: E402
    energy,
    minimize,
    mountain_pass,
    second_solution_distance,
)

EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 4
EXIT_BY_STATUS = {
    SolveStatus.CONVERGED: 0,
    SolveStatus.DIVERGED: 2,
    SolveStatus.STALLED: 3,
}


@dataclass
class CliState:
    settings: Settings
    seed: int
    correlation: CorrelationIDs = field(default_factory=lambda: CorrelationIDs(new_run_id()))
    started: float = field(default_factory=time.monotonic)

    def manifest(self, ctx: click.Context, inputs: dict[str, str]) -> RunManifest:
        return RunManifest(
            command=ctx.command_path,
            config={"settings": self.settings.to_dict(), "params": ctx.params},
            input_hashes={name: sha256_file(path) for name, path in inputs.items()},
            seed=self.seed,
            wall_ms=int((time.monotonic() - self.started) * 1000),
            run_id=self.correlation.run_id,
        )


def _fail(ctx: click.Context, e: VortexForgeError) -> None:
    state: Optional[CliState] = ctx.find_object(CliState)
    emit_event("cli.failed", "cli", state.correlation if state else None,
               severity="error", error=e.to_dict())
    click.echo(json.dumps(e.to_dict(), default=str), err=True)
    ctx.exit(EXIT_ERROR)


def guarded(fn: Callable) -> Callable:
    """Map library errors to exit code 1 with a JSON line on stderr."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VortexForgeError as e:
            _fail(click.get_current_context(), e)
    return wrapper


def parse_vortex(text: str) -> tuple[int, int]:
    """`p` or `p:n`."""
    p, _, n = text.partition(":")
    try:
        return int(p), int(n) if n else 1
    except ValueError:
        raise ParameterError(f"vortex must be p or p:n with integers, got {text!r}") from None


def _problem(graph: WeightedGraph, vortex: tuple[str, ...], lam: float = 1.0) -> VortexProblem:
    if not vortex:
        raise ParameterError("at least one --vortex is required")
    return VortexProblem(graph, lam, [parse_vortex(v) for v in vortex])


def _resolve_lambda(base: VortexProblem, lam: Optional[float], factor: Optional[float]) -> float:
    if (lam is None) == (factor is None):
        raise ParameterError("give exactly one of --lambda and --lambda-factor")
    if factor is not None:
        if not factor > 0:
            raise ParameterError(f"--lambda-factor must be > 0, got {factor}")
        return factor * necessary_lambda_bound(base)
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    return lam


def _emit(state: CliState, ctx: click.Context, payload: dict, output: Optional[str],
          inputs: dict[str, str]) -> None:
    if output:
        write_artifact(output, payload, state.manifest(ctx, inputs))
    else:
        click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


def _maximal_payload(prob: VortexProblem, u0, report: SolveReport) -> dict:
    if report.converged:
        report.energy = energy(prob, u0, report.solution_v)
    payload = solution_payload(prob, u0, report)
    if report.converged:
        payload["verification"] = verify_solution(prob, u0 + report.solution_v).to_dict()
    return payload


def _minimizer_payload(state: CliState, prob: VortexProblem, u0) -> tuple[dict, SolveStatus]:
    report = SolveReport(status=SolveStatus.CONVERGED, iterations=0, kind="minimizer")
    try:
        v, report.energy = minimize(prob, u0, -u0, state.settings.descent,
                                    correlation=state.correlation)
        report.solution_v = v
    except DescentError as e:
        report.status = SolveStatus.STALLED
        report.iterations = e.iterations or 0
        report.message = str(e)
    payload = solution_payload(prob, u0, report)
    if report.converged:
        payload["verification"] = verify_solution(prob, u0 + report.solution_v).to_dict()
    else:
        payload["message"] = report.message
    return payload, report.status


# ── group ───────────────────────────────────────────────────────────────


@click.group()
@click.option("--event-log", envvar="VORTEXFORGE_EVENT_LOG", default=None,
              help="Append structured JSONL events to this file.")
@click.option("--config", "config_path", envvar="VORTEXFORGE_CONFIG", default=None,
              help="JSON settings file (linear, scheme, descent, mountain_pass, jobs).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for every random choice.")
@click.pass_context
def main(ctx: click.Context, event_log: Optional[str], config_path: Optional[str], seed: int):
    """Solvers for the self-dual Chern-Simons vortex equation on weighted graphs."""
    set_emitter(EventEmitter(event_log))
    init_tracing()
    try:
        settings = load_settings(config_path)
    except VortexForgeError as e:
        _fail(ctx, e)
    ctx.obj = CliState(settings=settings, seed=seed)


# ── graph ───────────────────────────────────────────────────────────────


GENERATED_KINDS = [k.value for k in GraphKind if k is not GraphKind.FROM_FILE]


@main.command("graph")
@click.option("--kind", type=click.Choice(GENERATED_KINDS),
              default=None, help="Generator to use.")
@click.option("--m", type=int, default=None, help="Torus rows.")
@click.option("--k", type=int, default=None, help="Torus columns.")
@click.option("--n", type=int, default=None, help="Vertex count for complete/cycle/path/random.")
@click.option("--p", type=float, default=0.5, show_default=True, help="Edge probability (random).")
@click.option("--random-weights", is_flag=True, help="Uniform weights in [0.5, 1.5] (random).")
@click.option("--weight", type=float, default=None, help="Uniform edge weight.")
@click.option("--mu", type=float, default=None, help="Uniform vertex measure.")
@click.option("--from", "from_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Validate and normalise an existing Graph JSON.")
@click.option("-o", "--output", default=None, help="Write Graph JSON here instead of stdout.")
@click.pass_obj
@guarded
def cmd_graph(state: CliState, kind, m, k, n, p, random_weights, weight, mu, from_path, output):
    """Generate a graph, or normalise one with --from."""
    ctx = click.get_current_context()
    if (kind is None) == (from_path is None):
        raise ParameterError("give exactly one of --kind and --from")
    if from_path:
        g = generate_graph(GraphKind.FROM_FILE, path=from_path, weight=weight, mu=mu)
        inputs = {"graph": from_path}
    else:
        required = {"torus": ("m", "k")}.get(kind, ("n",))
        given = {"m": m, "k": k, "n": n}
        missing = [name for name in required if given[name] is None]
        if missing:
            raise ParameterError(f"--kind {kind} needs --{' --'.join(missing)}")
        g = generate_graph(kind, m=m, k=k, n=n, p=p, seed=state.seed,
                           random_weights=random_weights, weight=weight, mu=mu)
        inputs = {}
    _emit(state, ctx, g.to_dict(), output, inputs)


# ── solve / verify ──────────────────────────────────────────────────────


@main.command("solve")
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--lambda", "lam", type=float, default=None, help="Coupling λ.")
@click.option("--lambda-factor", type=float, default=None,
              help="Coupling as a multiple of the necessary bound.")
@click.option("--vortex", multiple=True, help="Vortex vertex p or p:n (repeatable).")
@click.option("--K", "shift", type=float, default=None, help="Shift K >= λ (default λ).")
@click.option("--tol", type=float, default=None, help="Residual tolerance of the scheme.")
@click.option("--mode", type=click.Choice(["iterate", "minimize", "both"]), default="iterate",
              show_default=True)
@click.option("-o", "--output", default=None, help="Write Solution JSON here instead of stdout.")
@click.pass_obj
@guarded
def cmd_solve(state: CliState, graph_path, lam, lambda_factor, vortex, shift, tol, mode, output):
    """Solve for one coupling with the monotone scheme and/or energy descent."""
    ctx = click.get_current_context()
    graph = load_graph(graph_path)
    base = _problem(graph, vortex)
    prob = base.with_lambda(_resolve_lambda(base, lam, lambda_factor))
    state.settings = state.settings.override("scheme", K=shift, residual_tol=tol)
    u0 = compute_u0(prob, state.settings.linear, state.correlation)

    status = SolveStatus.CONVERGED
    results: dict[str, dict] = {}
    if mode in ("iterate", "both"):
        report = monotone_iterate(prob, u0, state.settings.scheme,
                                  linear_cfg=state.settings.linear, correlation=state.correlation)
        results["maximal"] = _maximal_payload(prob, u0, report)
        status = report.status
    if mode in ("minimize", "both"):
        results["minimizer"], min_status = _minimizer_payload(state, prob, u0)
        if status is SolveStatus.CONVERGED:
            status = min_status

    payload = next(iter(results.values())) if len(results) == 1 else {
        **prob.to_dict(), "solutions": results,
    }
    _emit(state, ctx, payload, output, {"graph": graph_path})
    ctx.exit(EXIT_BY_STATUS[status])


@main.command("verify")
@click.argument("solution_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Graph JSON the solution was computed on.")
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.pass_obj
@guarded
def cmd_verify(state: CliState, solution_path, graph_path, tol):
    """Re-check a Solution JSON against its graph; exit 0 iff every check passes."""
    ctx = click.get_current_context()
    try:
        solution = json.loads(Path(solution_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParameterError(f"{solution_path} is not valid JSON: {e}") from None
    graph = load_graph(graph_path)
    if solution.get("graph_hash") != graph.graph_hash():
        raise ParameterError(
            f"solution was computed on graph {solution.get('graph_hash')}, "
            f"not {graph.graph_hash()}"
        )
    if solution.get("v") is None or solution.get("u0") is None:
        raise ParameterError("solution has no field to verify (did the solve converge?)")
    prob = VortexProblem(graph, solution["lambda"], [tuple(x) for x in solution["vortices"]])
    u = graph.check_field(solution["u0"], "u0") + graph.check_field(solution["v"], "v")
    report = verify_solution(prob, u, tol=tol, identity_tol=tol)
    click.echo(json.dumps({**prob.to_dict(), **report.to_dict()}, indent=2))
    ctx.exit(0 if report.passed else EXIT_VERIFY_FAILED)


# ── critical / sweep / mountain ─────────────────────────────────────────


@main.command("critical")
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--vortex", multiple=True, help="Vortex vertex p or p:n (repeatable).")
@click.option("--rel-width", type=float, default=1e-3, show_default=True,
              help="Stop when (lambda_hi - lambda_lo)/lambda_hi is at most this.")
@click.option("-o", "--output", default=None)
@click.pass_obj
@guarded
def cmd_critical(state: CliState, graph_path, vortex, rel_width, output):
    """Bracket the critical coupling by bisection in log λ."""
    ctx = click.get_current_context()
    base = _problem(load_graph(graph_path), vortex)
    estimate = find_critical_lambda(base.graph, base.vortices, rel_width, state.settings.scheme,
                                    state.settings.linear, correlation=state.correlation)
    payload = {"graph_hash": base.graph.graph_hash(),
               "vortices": [[p, m] for p, m in base.vortices], **estimate.to_dict()}
    _emit(state, ctx, payload, output, {"graph": graph_path})


@main.command("sweep")
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--vortex", multiple=True, help="Vortex vertex p or p:n (repeatable).")
@click.option("--lambda", "lambdas", type=float, multiple=True, help="Coupling (repeatable).")
@click.option("--lambda-factor", "factors", type=float, multiple=True,
              help="Coupling as a multiple of the necessary bound (repeatable).")
@click.option("--jobs", type=int, envvar=JOBS_ENV, default=None,
              help="Parallel probes (default from settings).")
@click.option("--minimize/--no-minimize", "do_minimize", default=True, show_default=True)
@click.option("--mountain", is_flag=True, help="Also run the mountain pass per converged λ.")
@click.option("--timing", is_flag=True, help="Fill the wall_ms column (breaks byte-identity).")
@click.option("-o", "--output", default=None, help="Write CSV here instead of stdout.")
@click.pass_obj
@guarded
def cmd_sweep(state: CliState, graph_path, vortex, lambdas, factors, jobs, do_minimize,
              mountain, timing, output):
    """One CSV row per coupling; failures are recorded in the row."""
    ctx = click.get_current_context()
    base = _problem(load_graph(graph_path), vortex)
    if not lambdas and not factors:
        raise ParameterError("give at least one --lambda or --lambda-factor")
    bound = necessary_lambda_bound(base)
    values = [float(x) for x in lambdas] + [f * bound for f in factors]
    if any(not x > 0 for x in values):
        raise ParameterError("every coupling must be > 0")
    options = SweepOptions(
        minimize=do_minimize,
        mountain=mountain,
        scheme=state.settings.scheme,
        descent=state.settings.descent,
        mountain_pass=state.settings.mountain_pass,
        linear=state.settings.linear,
    )
    rows = sweep_lambda(base.graph, base.vortices, values, options,
                        jobs=jobs or state.settings.jobs, correlation=state.correlation)
    text = sweep_csv(rows, timing)
    if output:
        write_text_artifact(output, text, state.manifest(ctx, {"graph": graph_path}))
    else:
        click.echo(text, nl=False)


@main.command("mountain")
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--vortex", multiple=True, help="Vortex vertex p or p:n (repeatable).")
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--lambda-factor", type=float, default=None)
@click.option("--critical-factor", type=float, default=None,
              help="Coupling as a multiple of the estimated critical value lambda_hi.")
@click.option("--rel-width", type=float, default=1e-3, show_default=True)
@click.option("-o", "--output", default=None)
@click.pass_obj
@guarded
def cmd_mountain(state: CliState, graph_path, vortex, lam, lambda_factor, critical_factor,
                 rel_width, output):
    """Local minimizer plus a mountain-pass second solution."""
    ctx = click.get_current_context()
    base = _problem(load_graph(graph_path), vortex)
    critical = None
    if critical_factor is not None:
        if lam is not None or lambda_factor is not None:
            raise ParameterError("--critical-factor excludes --lambda and --lambda-factor")
        if not critical_factor > 0:
            raise ParameterError(f"--critical-factor must be > 0, got {critical_factor}")
        critical = find_critical_lambda(base.graph, base.vortices, rel_width,
                                        state.settings.scheme, state.settings.linear,
                                        correlation=state.correlation)
        value = critical_factor * critical.lambda_hi
    else:
        value = _resolve_lambda(base, lam, lambda_factor)
    prob = base.with_lambda(value)
    u0 = compute_u0(prob, state.settings.linear, state.correlation)

    minimizer, min_status = _minimizer_payload(state, prob, u0)
    payload = {**prob.to_dict(), "minimizer": minimizer}
    if critical is not None:
        payload["critical"] = {k: v for k, v in critical.to_dict().items() if k != "probes"}
    status = min_status
    if min_status is SolveStatus.CONVERGED:
        v_min = prob.graph.check_field(minimizer["v"], "v_min")
        report = mountain_pass(prob, u0, v_min, state.settings.mountain_pass,
                               state.settings.descent, correlation=state.correlation)
        mp = solution_payload(prob, u0, report)
        mp["message"] = report.message
        if report.converged:
            mp["verification"] = verify_solution(prob, u0 + report.solution_v).to_dict()
            mp["distance"] = second_solution_distance(v_min, report)
        payload["mountain_pass"] = mp
        status = report.status
    _emit(state, ctx, payload, output, {"graph": graph_path})
    ctx.exit(EXIT_BY_STATUS[status])


if __name__ == "__main__":
    main()
