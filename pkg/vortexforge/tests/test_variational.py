"""Energy functional, Armijo descent, Newton polish and the mountain pass."""
import math

import numpy as np
import pytest

from vortexforge.packages.chern_simons import (
    SolveStatus,
    VortexProblem,
    compute_u0,
    monotone_iterate,
    necessary_lambda_bound,
    residual_reduced,
    subsolution_lambda,
    verify_solution,
)
from vortexforge.packages.errors import DescentError, EnergyOverflowError, ParameterError
from vortexforge.packages.graph import WeightedGraph, generate_graph, integrate
from vortexforge.packages.sweep import find_critical_lambda
from vortexforge.packages.variational import (
    DescentConfig,
    MountainPassConfig,
    energy,
    energy_gradient,
    energy_hessian,
    find_endpoint_shift,
    hessian_min_eigenvalue,
    minimize,
    mountain_pass,
    newton_polish,
    second_solution_distance,
    translation_gap,
)
from vortexforge.packages.variational.mountain_pass import _respace, explicit_step, string_forces


def _problem(graph, factor=4.0, vortices=(0,)):
    base = VortexProblem(graph, 1.0, vortices)
    prob = base.with_lambda(factor * necessary_lambda_bound(base))
    return prob, compute_u0(prob)


def _fd_graphs():
    return [
        generate_graph("complete", n=3),
        generate_graph("torus", m=4, k=4),
        WeightedGraph(5, [(0, 1, 2.0), (1, 2, 1.0), (2, 3, 0.5), (3, 4, 1.0), (1, 3, 1.5)],
                      mu=[1.0, 0.5, 2.0, 1.0, 1.5]),
    ]


def test_energy_on_k2_at_zero_field(k2):
    prob, u0 = _problem(k2)
    assert energy(prob, u0, -u0) == pytest.approx(2 * math.pi**2, rel=1e-12)


def test_energy_overflow_is_reported(k2):
    prob, u0 = _problem(k2)
    with pytest.raises(EnergyOverflowError):
        energy(prob, u0, np.full(2, 1000.0))


@pytest.mark.parametrize("graph", _fd_graphs(), ids=["k3", "torus44", "weighted5"])
def test_gradient_matches_central_differences(graph):
    prob, u0 = _problem(graph, vortices=(0, 1))
    rng = np.random.default_rng(0)
    h = 1e-6
    for _ in range(10):
        v = -u0 - 1.0 + 0.3 * rng.standard_normal(graph.n)
        phi = rng.standard_normal(graph.n)
        fd = (energy(prob, u0, v + h * phi) - energy(prob, u0, v - h * phi)) / (2 * h)
        exact = float(np.dot(energy_gradient(prob, u0, v), phi))
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


@pytest.mark.parametrize("graph", _fd_graphs(), ids=["k3", "torus44", "weighted5"])
def test_hessian_matches_gradient_differences(graph):
    prob, u0 = _problem(graph)
    rng = np.random.default_rng(1)
    h = 1e-6
    v = -u0 - 0.5 + 0.2 * rng.standard_normal(graph.n)
    phi = rng.standard_normal(graph.n)
    plus = energy_gradient(prob, u0, v + h * phi)
    minus = energy_gradient(prob, u0, v - h * phi)
    fd = (plus - minus) / (2 * h)
    np.testing.assert_allclose(energy_hessian(prob, u0, v) @ phi, fd, rtol=1e-6, atol=1e-6)


def test_gradient_vanishes_at_maximal_solution(torus44):
    prob, u0 = _problem(torus44)
    report = monotone_iterate(prob, u0)
    grad = energy_gradient(prob, u0, report.solution_v)
    assert np.max(np.abs(grad)) <= 1e-9


def test_translation_gap_identity(cycle8):
    prob, u0 = _problem(cycle8)
    v = -u0 - 0.3
    shift = 0.7
    expected = energy(prob, u0, v - shift) - energy(prob, u0, v) + 4 * math.pi * prob.N * shift
    assert translation_gap(prob, u0, v, shift) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("graph", _fd_graphs(), ids=["k3", "torus44", "weighted5"])
def test_gradient_is_the_weighted_negative_residual(graph):
    # ∇I(v) = 0 exactly where the reduced equation holds
    prob, u0 = _problem(graph)
    rng = np.random.default_rng(4)
    for _ in range(10):
        v = -u0 - 1.0 + 0.5 * rng.standard_normal(graph.n)
        np.testing.assert_allclose(energy_gradient(prob, u0, v),
                                   -graph.mu * residual_reduced(prob, u0, v), atol=1e-10)
    at_start = energy_gradient(prob, u0, -u0)
    assert set(np.flatnonzero(np.abs(at_start) > 1e-9)) == {0}


def test_minimizer_solves_the_reduced_equation(torus44):
    prob, u0 = _problem(torus44)
    v_min, _ = minimize(prob, u0, -u0)
    assert np.max(np.abs(residual_reduced(prob, u0, v_min))) <= 1e-9
    assert verify_solution(prob, u0 + v_min).passed


@pytest.mark.parametrize("graph", _fd_graphs(), ids=["k3", "torus44", "weighted5"])
def test_energy_is_bounded_below_by_the_source_term(graph):
    prob, u0 = _problem(graph)
    rng = np.random.default_rng(5)
    for _ in range(200):
        v = -u0 + rng.normal(-1.0, 1.0) + rng.standard_normal(graph.n)
        assert energy(prob, u0, v) >= prob.source_density * integrate(graph, v) - 1e-12


# ── descent ─────────────────────────────────────────────────────────────


def test_minimize_finds_a_strict_local_minimum(torus44, captured_events):
    prob, u0 = _problem(torus44)
    start = -u0
    v, e = minimize(prob, u0, start)
    assert np.max(np.abs(energy_gradient(prob, u0, v))) <= 1e-9
    assert np.max(np.abs(residual_reduced(prob, u0, v))) <= 1e-8
    assert e <= energy(prob, u0, start)
    assert e == energy(prob, u0, v)
    assert np.max(u0 + v) < 0
    assert hessian_min_eigenvalue(prob, u0, v) > 0
    assert any(ev.event_type == "descent.completed" for ev in captured_events)


def test_projected_descent_respects_lower_bound(torus44):
    prob, u0 = _problem(torus44)
    floor = -u0 - 0.05
    v, _ = minimize(prob, u0, -u0, lower_bound=floor)
    assert np.all(v >= floor)


def test_descent_budget_raises(torus44):
    prob, u0 = _problem(torus44)
    with pytest.raises(DescentError) as exc:
        minimize(prob, u0, -u0, DescentConfig(max_steps=3, newton=False))
    assert exc.value.iterations == 3
    assert exc.value.last_iterate.shape == (16,)
    assert exc.value.to_dict()["error"] == "DescentError"


def test_minimize_converges_on_a_stiff_cycle(cycle8, captured_events):
    prob, u0 = _problem(cycle8, factor=8.0)
    start = -u0
    v, e = minimize(prob, u0, start)
    assert np.max(np.abs(energy_gradient(prob, u0, v))) <= 1e-9
    assert e <= energy(prob, u0, start)
    assert verify_solution(prob, u0 + v).passed
    done = [ev for ev in captured_events if ev.event_type == "descent.completed"][-1]
    assert done.payload["newton_steps"] > 0


def test_newton_and_gradient_steps_reach_the_same_minimizer(torus44):
    prob, u0 = _problem(torus44)
    v_newton, e_newton = minimize(prob, u0, -u0)
    v_plain, e_plain = minimize(prob, u0, -u0, DescentConfig(newton=False))
    np.testing.assert_allclose(v_newton, v_plain, atol=1e-7)
    assert e_newton == pytest.approx(e_plain, rel=1e-12, abs=1e-12)


def test_descent_energy_never_increases(cycle8):
    prob, u0 = _problem(cycle8, factor=4.0)
    v = -u0
    e = energy(prob, u0, v)
    for tol in (1e-1, 1e-3, 1e-5, 1e-7, 1e-9):
        v, e_next = minimize(prob, u0, v, DescentConfig(grad_tol=tol))
        assert e_next <= e
        e = e_next


@pytest.mark.parametrize("kwargs", [
    {"grad_tol": 0.0},
    {"max_steps": 0},
    {"armijo_c": 1.0},
    {"backtrack": 1.5},
    {"init_step": -1.0},
])
def test_descent_config_validation(kwargs):
    with pytest.raises(ParameterError):
        DescentConfig(**kwargs)


def test_newton_polish_returns_to_solution(torus44):
    prob, u0 = _problem(torus44)
    v = monotone_iterate(prob, u0).solution_v
    rng = np.random.default_rng(3)
    polished = newton_polish(prob, u0, v + 1e-3 * rng.standard_normal(16))
    assert polished.converged
    np.testing.assert_allclose(polished.v, v, atol=1e-8)


# ── mountain pass ───────────────────────────────────────────────────────


def test_endpoint_shift_drops_energy(cycle8):
    prob, u0 = _problem(cycle8)
    v_min, e_min = minimize(prob, u0, -u0)
    c0 = find_endpoint_shift(prob, u0, v_min)
    assert c0 >= 1.0
    assert energy(prob, u0, v_min - c0) <= e_min - 1.0


def test_respace_equalises_arc_length():
    path = np.array([[0.0], [0.1], [0.2], [2.0], [3.0]])
    out = _respace(path)
    seg = np.linalg.norm(np.diff(out, axis=0), axis=1)
    np.testing.assert_allclose(seg, seg.mean())
    assert out[0, 0] == 0.0 and out[-1, 0] == 3.0


def test_mountain_pass_needs_a_critical_point(cycle8):
    prob, u0 = _problem(cycle8)
    with pytest.raises(ParameterError):
        mountain_pass(prob, u0, -u0 - 0.5)


def test_mountain_pass_config_validation():
    with pytest.raises(ParameterError):
        MountainPassConfig(path_points=2)
    with pytest.raises(ParameterError):
        MountainPassConfig(deform_tol=0.0)


@pytest.mark.slow
def test_second_solution_on_k2(k2, captured_events):
    base = VortexProblem(k2, 1.0, [0])
    u0 = compute_u0(base)
    prob = base.with_lambda(4.0 * subsolution_lambda(base, u0))
    v_min, e_min = minimize(prob, u0, -u0)
    report = mountain_pass(prob, u0, v_min)
    assert report.status is SolveStatus.CONVERGED, report.message
    assert report.kind == "mountain_pass"
    assert second_solution_distance(v_min, report) > 1e-4
    assert np.max(np.abs(residual_reduced(prob, u0, report.solution_v))) <= 1e-8
    assert report.energy > e_min
    assert report.energy_gap == pytest.approx(report.energy - e_min)
    assert np.max(u0 + report.solution_v) < 0
    check = verify_solution(prob, u0 + report.solution_v)
    assert check.passed, check.to_dict()
    assert check.check("integral_identity").passed
    assert any(e.event_type == "mountain_pass.completed" for e in captured_events)


@pytest.mark.slow
def test_second_solution_on_torus_above_critical(torus44):
    est = find_critical_lambda(torus44, [0], rel_width=1e-2)
    base = VortexProblem(torus44, 1.0, [0])
    prob = base.with_lambda(4.0 * est.lambda_hi)
    u0 = compute_u0(prob)
    v_min, e_min = minimize(prob, u0, -u0)
    report = mountain_pass(prob, u0, v_min)
    assert report.status is SolveStatus.CONVERGED, report.message
    assert second_solution_distance(v_min, report) > 1e-4
    assert np.max(np.abs(residual_reduced(prob, u0, v_min))) <= 1e-8
    assert np.max(np.abs(residual_reduced(prob, u0, report.solution_v))) <= 1e-8
    assert report.energy > e_min
    assert verify_solution(prob, u0 + report.solution_v).passed
    # the saddle above the minimizer sits near I = 78.76, about 4.5 away in sup norm
    assert report.energy == pytest.approx(78.757, rel=2e-2)
    assert second_solution_distance(v_min, report) == pytest.approx(4.5, rel=0.2)


def test_string_forces_reverse_the_tangential_part_at_the_climbing_node():
    grads = np.array([[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]])
    tangents = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    forces = string_forces(grads, tangents, climbing=1)
    np.testing.assert_allclose(forces, [[0.0, 2.0], [-3.0, -1.0], [0.5, 0.0]])


def test_explicit_step_follows_the_hessian_bound(k2):
    prob, u0 = _problem(k2)
    far = np.array([-u0 - 100.0, -u0 - 200.0])
    assert explicit_step(prob, u0, far) == pytest.approx(0.25, rel=1e-12)
    near = np.array([-u0 - 0.1])
    assert explicit_step(prob, u0, near) < 0.25
