"""Critical-coupling bracketing and λ-sweeps."""
import csv
import io

import numpy as np
import pytest

from vortexforge.packages.chern_simons import SchemeConfig, VortexProblem, necessary_lambda_bound
from vortexforge.packages.errors import CriticalSearchError, ParameterError
from vortexforge.packages.graph import generate_graph
from vortexforge.packages.sweep import (
    SWEEP_COLUMNS,
    SweepOptions,
    SweepRow,
    converged_upward_closed,
    find_critical_lambda,
    format_value,
    max_v_monotone,
    sweep_csv,
    sweep_lambda,
    write_sweep_csv,
)


def _bound(graph, vortices=(0,)):
    return necessary_lambda_bound(VortexProblem(graph, 1.0, vortices))


# ── critical coupling ───────────────────────────────────────────────────


def test_bracket_on_k2(k2, captured_events):
    est = find_critical_lambda(k2, [0], rel_width=1e-3)
    bound = _bound(k2)
    assert est.bound == bound
    assert est.lambda_lo < est.lambda_hi
    assert est.lambda_hi >= bound - 1e-9
    assert est.lambda_hi >= 93.8
    assert est.relative_width <= 1e-3
    assert not est.probe_at(est.lambda_lo).report.converged
    assert est.lo_certified == (est.probe_at(est.lambda_lo).report.status.value == "diverged")
    assert est.interval_consistent
    assert est.hi_verified
    assert est.lambda_lo <= est.upper_bound
    assert est.probe_at(est.lambda_lo).report.min_value_trace
    probes = [e for e in captured_events if e.event_type == "critical.probe"]
    assert len(probes) == len(est.probes)
    assert captured_events[-1].event_type == "critical.completed"


@pytest.mark.parametrize("graph", [
    generate_graph("complete", n=2),
    generate_graph("complete", n=3),
    generate_graph("torus", m=4, k=4),
], ids=["k2", "k3", "torus44"])
def test_bracket_respects_the_necessary_bound(graph):
    est = find_critical_lambda(graph, [0], rel_width=1e-2)
    seed = est.probes[0]
    assert seed.lam < est.bound
    assert seed.report.status.value == "diverged"
    assert est.probes[1].lam == 2.0 * est.bound
    assert est.lambda_hi >= est.bound - 1e-9
    assert est.lambda_lo < est.lambda_hi <= est.upper_bound / (1.0 - 1e-2)


def test_finer_bracket_is_nested(k2):
    coarse = find_critical_lambda(k2, [0], rel_width=1e-2)
    fine = find_critical_lambda(k2, [0], rel_width=1e-3)
    assert coarse.lambda_lo <= fine.lambda_lo < fine.lambda_hi <= coarse.lambda_hi


def test_bracket_serialises(k2):
    d = find_critical_lambda(k2, [0], rel_width=1e-2).to_dict()
    assert d["estimate"] == "numerical bracket"
    for key in ("lambda_lo", "lambda_hi", "bound", "upper_bound", "probes", "lo_min_value_trace"):
        assert key in d
    assert all(set(p) >= {"lambda", "status", "iterations"} for p in d["probes"])


@pytest.mark.parametrize("rel_width", [0.0, 1.0, -0.5])
def test_rel_width_must_be_a_fraction(k2, rel_width):
    with pytest.raises(ParameterError):
        find_critical_lambda(k2, [0], rel_width=rel_width)


def test_search_cap_raises_with_probe_log(k2):
    with pytest.raises(CriticalSearchError) as exc:
        find_critical_lambda(k2, [0], scheme_cfg=SchemeConfig(max_iter=1))
    details = exc.value.to_dict()
    assert details["error"] == "CriticalSearchError"
    # one seed below the bound, then 2, 4, ..., 2**19 times the bound
    assert len(details["probes"]) == len(exc.value.probes) == 20
    assert exc.value.probes[1].lam == pytest.approx(2.0 * _bound(k2))
    assert all(p["status"] in ("stalled", "diverged") for p in details["probes"])


def test_fixed_shift_is_raised_to_lambda(k2):
    est = find_critical_lambda(k2, [0], rel_width=1e-2, scheme_cfg=SchemeConfig(K=1.0))
    assert est.lambda_hi >= _bound(k2)
    assert est.interval_consistent


# ── sweeps ──────────────────────────────────────────────────────────────


def test_sweep_interval_structure(torus44):
    bound = _bound(torus44)
    lambdas = [f * bound for f in (0.5, 1.0, 2.0, 4.0)]
    rows = sweep_lambda(torus44, [0], lambdas)
    assert [r.lam for r in rows] == lambdas
    statuses = [r.status for r in rows]
    assert statuses[0] == "diverged" and statuses[1] != "converged"
    assert statuses[-1] == "converged"
    solved = [s == "converged" for s in statuses]
    assert sum(1 for a, b in zip(solved, solved[1:]) if a != b) == 1
    assert converged_upward_closed(rows)
    assert max_v_monotone(rows)
    for row in rows:
        if row.status == "converged":
            assert row.min_u < 0 and row.max_u < 0
            assert row.verified
            assert row.energy_maximal is not None
        else:
            assert row.min_u is None and row.energy_maximal is None
    assert rows[-1].energy_min is not None and rows[-1].error is None


def test_sweep_is_deterministic_across_jobs(cycle8):
    bound = _bound(cycle8)
    lambdas = [f * bound for f in (4.0, 0.5, 3.0, 6.0, 0.9)]
    options = SweepOptions(minimize=False)
    serial = sweep_lambda(cycle8, [0], lambdas, options, jobs=1)
    parallel = sweep_lambda(cycle8, [0], lambdas, options, jobs=3)
    assert [r.lam for r in parallel] == lambdas
    assert sweep_csv(serial) == sweep_csv(parallel)


def test_sweep_records_row_errors(k2, captured_events):
    rows = sweep_lambda(k2, [0], [-1.0, 4.0 * _bound(k2)], SweepOptions(minimize=False))
    assert rows[0].status == "error"
    assert rows[0].error.startswith("ParameterError")
    assert rows[1].status == "converged"
    assert sum(1 for e in captured_events if e.event_type == "sweep.row") == 2


def test_sweep_edge_cases(k2):
    assert sweep_lambda(k2, [0], []) == []
    with pytest.raises(ParameterError):
        sweep_lambda(k2, [0], [1.0], jobs=0)


def test_interval_checks_on_handmade_rows():
    good = [SweepRow(1.0, "diverged"), SweepRow(2.0, "converged", max_v=-1.0),
            SweepRow(3.0, "converged", max_v=-0.5)]
    assert converged_upward_closed(good)
    assert max_v_monotone(good)
    bad = [SweepRow(1.0, "converged", max_v=0.0), SweepRow(2.0, "stalled"),
           SweepRow(3.0, "converged", max_v=-1.0)]
    assert not converged_upward_closed(bad)
    assert not max_v_monotone(bad)


# ── CSV ─────────────────────────────────────────────────────────────────


def test_format_value():
    assert format_value(None) == ""
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(7) == "7"
    assert format_value("converged") == "converged"


def test_sweep_csv_layout(tmp_path):
    rows = [
        SweepRow(1.5, "converged", iterations=12, residual=1e-11, min_u=-2.0, wall_ms=37),
        SweepRow(0.5, "error", error="ParameterError: bad"),
    ]
    text = sweep_csv(rows)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert list(parsed[0]) == SWEEP_COLUMNS
    assert parsed[0]["lambda"] == "1.5"
    assert parsed[0]["wall_ms"] == ""
    assert parsed[1]["error"] == "ParameterError: bad"
    assert list(csv.DictReader(io.StringIO(sweep_csv(rows, timing=True))))[0]["wall_ms"] == "37"

    path = write_sweep_csv(rows, tmp_path / "out" / "sweep.csv")
    assert path.read_text() == text


def test_sweep_floats_round_trip(torus44):
    rows = sweep_lambda(torus44, [0], [4.0 * _bound(torus44)], SweepOptions(minimize=False))
    parsed = next(csv.DictReader(io.StringIO(sweep_csv(rows))))
    assert float(parsed["residual"]) == rows[0].residual
    assert float(parsed["min_u"]) == rows[0].min_u
    assert np.isfinite(float(parsed["energy_maximal"]))
