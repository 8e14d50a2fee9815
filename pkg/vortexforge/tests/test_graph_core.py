"""Weighted graphs, discrete calculus and spectral constants."""
import json

import numpy as np
import pytest

from vortexforge.packages.errors import (
    DisconnectedGraphError,
    FieldAlignmentError,
    GraphError,
    ParameterError,
)
from vortexforge.packages.graph import (
    WeightedGraph,
    dirac_mass,
    dump_graph,
    fiedler_vector,
    generate_graph,
    gradient_form,
    gradient_norm,
    integrate,
    laplacian_apply,
    load_graph,
    norm_p,
    poincare_constant,
    sobolev_norm,
    spectral_gap,
    volume,
)


def _weighted_path():
    return WeightedGraph(4, [(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.5)], mu=[1.0, 2.0, 0.5, 3.0])


def _graphs():
    return [
        generate_graph("complete", n=3),
        generate_graph("torus", m=4, k=4),
        _weighted_path(),
        generate_graph("random", n=12, p=0.3, seed=7, random_weights=True),
    ]


# ── construction and validation ─────────────────────────────────────────


def test_torus_4x4_shape(torus44):
    assert torus44.n == 16
    assert len(torus44.edges) == 32
    assert np.all(torus44.degree == 4.0)
    assert volume(torus44) == 16.0


def test_edges_are_normalised():
    g = WeightedGraph(3, [(2, 1, 1.0), (1, 0)])
    assert g.edges == ((0, 1, 1.0), (1, 2, 1.0))
    assert g.neighbors(1) == [0, 2]
    assert g.weight(2, 1) == 1.0


@pytest.mark.parametrize("edges", [
    [(0, 0, 1.0), (0, 1, 1.0)],
    [(0, 1, 1.0), (1, 0, 2.0)],
    [(0, 1, -1.0)],
    [(0, 1, float("nan"))],
    [(0, 5, 1.0)],
    [(0, 1.5, 1.0)],
])
def test_invalid_edges_rejected(edges):
    with pytest.raises(GraphError):
        WeightedGraph(2, edges)


def test_invalid_measure_rejected():
    with pytest.raises(GraphError):
        WeightedGraph(2, [(0, 1)], mu=[1.0, 0.0])
    with pytest.raises(GraphError):
        WeightedGraph(2, [(0, 1)], mu=[1.0])


def test_disconnected_graph_rejected():
    with pytest.raises(DisconnectedGraphError):
        WeightedGraph(4, [(0, 1), (2, 3)])


@pytest.mark.parametrize("kind,params", [
    ("torus", {"m": 2, "k": 4}),
    ("cycle", {"n": 2}),
    ("complete", {"n": 1}),
    ("nonsense", {"n": 4}),
])
def test_generator_rejects_degenerate_params(kind, params):
    with pytest.raises(GraphError):
        generate_graph(kind, **params)


def test_generator_overrides():
    g = generate_graph("cycle", n=5, weight=2.0, mu=[1, 2, 3, 4, 5])
    assert all(w == 2.0 for _, _, w in g.edges)
    assert volume(g) == 15.0
    with pytest.raises(GraphError):
        generate_graph("cycle", n=5, mu=[1.0, 2.0])


def test_random_graph_is_seeded():
    a = generate_graph("random", n=15, p=0.25, seed=3, random_weights=True)
    b = generate_graph("random", n=15, p=0.25, seed=3, random_weights=True)
    assert a.graph_hash() == b.graph_hash()
    assert all(0.5 <= w <= 1.5 for _, _, w in a.edges)


def test_field_alignment(k3):
    with pytest.raises(FieldAlignmentError):
        k3.check_field([1.0, 2.0])
    with pytest.raises(FieldAlignmentError):
        k3.check_field([1.0, np.inf, 0.0])
    with pytest.raises(GraphError):
        k3.check_vertex(3)
    with pytest.raises(GraphError):
        k3.check_vertex("a")


def test_graph_json_round_trip(tmp_path):
    g = _weighted_path()
    path = tmp_path / "g.json"
    path.write_text(dump_graph(g))
    loaded = load_graph(path)
    assert loaded.graph_hash() == g.graph_hash()
    assert json.loads(dump_graph(loaded)) == g.to_dict()


def test_graph_json_defaults_measure():
    g = WeightedGraph.from_dict({"n": 2, "edges": [[0, 1, 1.0]]})
    assert list(g.mu) == [1.0, 1.0]
    with pytest.raises(GraphError):
        WeightedGraph.from_dict({"edges": []})


def test_fields_are_read_only(k3):
    with pytest.raises(ValueError):
        k3.mu[0] = 2.0


# ── calculus ────────────────────────────────────────────────────────────


def test_laplacian_on_k2(k2):
    np.testing.assert_array_equal(laplacian_apply(k2, [1.0, 0.0]), [-1.0, 1.0])


def test_laplacian_uses_measure():
    g = WeightedGraph(2, [(0, 1, 3.0)], mu=[2.0, 0.5])
    np.testing.assert_allclose(laplacian_apply(g, [0.0, 1.0]), [1.5, -6.0])


def test_laplacian_kills_constants(torus44):
    np.testing.assert_array_equal(laplacian_apply(torus44, torus44.ones() * 3.7), 0.0)


@pytest.mark.parametrize("g", _graphs(), ids=["k3", "torus44", "weighted_path", "random12"])
def test_integration_by_parts(g):
    rng = np.random.default_rng(0)
    for _ in range(1000):
        u, v = rng.standard_normal(g.n), rng.standard_normal(g.n)
        lhs = integrate(g, gradient_form(g, u, v))
        rhs = -integrate(g, u * laplacian_apply(g, v))
        scale = integrate(g, np.abs(u) * np.abs(laplacian_apply(g, v))) + 1.0
        assert abs(lhs - rhs) <= 1e-12 * scale
        assert abs(integrate(g, laplacian_apply(g, u))) <= 1e-12 * scale


def test_gradient_form_is_symmetric_and_nonnegative():
    g = _weighted_path()
    rng = np.random.default_rng(1)
    u, v = rng.standard_normal(4), rng.standard_normal(4)
    np.testing.assert_allclose(gradient_form(g, u, v), gradient_form(g, v, u))
    assert np.all(gradient_form(g, u, u) >= 0)
    np.testing.assert_allclose(gradient_norm(g, u) ** 2, gradient_form(g, u, u))


def test_norms(k3):
    u = np.array([3.0, -4.0, 0.0])
    assert norm_p(k3, u, 2) == 5.0
    assert norm_p(k3, u, np.inf) == 4.0
    assert norm_p(k3, u, 1) == pytest.approx(7.0)
    with pytest.raises(ParameterError):
        norm_p(k3, u, 0.5)
    assert sobolev_norm(k3, k3.ones()) == pytest.approx(np.sqrt(3.0))


def test_dirac_mass_has_unit_integral():
    g = _weighted_path()
    for p in range(g.n):
        assert integrate(g, dirac_mass(g, p)) == pytest.approx(1.0, abs=1e-15)


# ── spectral ────────────────────────────────────────────────────────────


def test_poincare_constant_complete_graphs(k2, k3):
    assert abs(poincare_constant(k2) - 0.5) <= 1e-10
    assert abs(poincare_constant(k3) - 1.0 / 3.0) <= 1e-10


def test_poincare_matches_dense_oracle():
    g = _weighted_path()
    L = g.combinatorial_laplacian().toarray()
    vals = np.sort(np.linalg.eigvals(np.diag(1.0 / g.mu) @ L).real)
    assert poincare_constant(g) == pytest.approx(1.0 / vals[1], rel=1e-10)


def test_poincare_inequality_holds_with_equality_on_fiedler_vector(torus44):
    C = poincare_constant(torus44)
    rng = np.random.default_rng(2)
    for _ in range(1000):
        u = rng.standard_normal(16)
        u -= integrate(torus44, u) / volume(torus44)
        dirichlet = integrate(torus44, gradient_form(torus44, u, u))
        assert integrate(torus44, u * u) <= C * dirichlet + 1e-12
    phi = fiedler_vector(torus44)
    assert integrate(torus44, phi * phi) == pytest.approx(1.0)
    assert integrate(torus44, gradient_form(torus44, phi, phi)) == pytest.approx(1.0 / C)


def test_spectral_gap_of_cycle(cycle8):
    assert spectral_gap(cycle8) == pytest.approx(2.0 - 2.0 * np.cos(2.0 * np.pi / 8), rel=1e-12)


def test_relabel_commutes_with_laplacian():
    g = _weighted_path()
    perm = [2, 0, 3, 1]
    h = g.relabel(perm)
    u = np.array([0.3, -1.0, 2.0, 0.7])
    pu = np.empty(4)
    pu[perm] = u
    expected = np.empty(4)
    expected[perm] = laplacian_apply(g, u)
    np.testing.assert_allclose(laplacian_apply(h, pu), expected)
    assert poincare_constant(h) == pytest.approx(poincare_constant(g))
    with pytest.raises(GraphError):
        g.relabel([0, 0, 1, 2])


@pytest.mark.parametrize("g", _graphs(), ids=["k3", "torus44", "weighted_path", "random12"])
@pytest.mark.parametrize("K", [1e-3, 1.0, 50.0])
def test_maximum_principle_for_shifted_operator(g, K):
    # −Δu + Ku = f with f ≥ 0 forces u ≥ 0
    A = g.combinatorial_laplacian().toarray() + K * np.diag(g.mu)
    rng = np.random.default_rng(11)
    for _ in range(200):
        f = rng.exponential(size=g.n) * (rng.random(g.n) < 0.3)
        u = np.linalg.solve(A, g.mu * f)
        np.testing.assert_allclose(-laplacian_apply(g, u) + K * u, f, atol=1e-9)
        assert u.min() >= -1e-12
