"""
Weighted finite graphs and vertex fields.

A WeightedGraph is immutable after construction: edge weights, vertex measure
and the derived sparse structures are read-only arrays, so one graph can be
shared by many solver threads.

Directed edge arrays are stored in CSR order (row ascending, then neighbor
index ascending); every summation over neighbors follows that order, which
keeps results bit-reproducible.
"""
from __future__ import annotations

import hashlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import networkx as nx
import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from vortexforge.packages.errors import DisconnectedGraphError, FieldAlignmentError, GraphError

VertexField = npt.NDArray[np.float64]
"""A real value per vertex, aligned with one WeightedGraph."""

Edge = tuple[int, int, float]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class WeightedGraph:
    """Connected finite graph with symmetric positive weights and a positive vertex measure."""

    def __init__(self, n: int, edges: Iterable[Sequence], mu: Optional[Sequence[float]] = None):
        if int(n) != n or n < 2:
            raise GraphError(f"graph needs at least 2 vertices, got n={n}")
        self._n = int(n)

        seen: dict[tuple[int, int], float] = {}
        for item in edges:
            if len(item) == 2:
                x, y, w = item[0], item[1], 1.0
            elif len(item) == 3:
                x, y, w = item
            else:
                raise GraphError(f"edge must be (x, y) or (x, y, w), got {item!r}")
            if int(x) != x or int(y) != y:
                raise GraphError(f"edge endpoints must be integers, got {item!r}")
            x, y, w = int(x), int(y), float(w)
            if not (0 <= x < self._n and 0 <= y < self._n):
                raise GraphError(f"edge ({x}, {y}) references a vertex outside 0..{self._n - 1}")
            if x == y:
                raise GraphError(f"self-loop at vertex {x}")
            if not math.isfinite(w) or w <= 0:
                raise GraphError(f"edge ({x}, {y}) weight must be finite and > 0, got {w}")
            key = (min(x, y), max(x, y))
            if key in seen:
                raise GraphError(f"duplicate edge {key[0]}-{key[1]}")
            seen[key] = w
        if not seen:
            raise GraphError("graph has no edges")
        self._edges: tuple[Edge, ...] = tuple((x, y, w) for (x, y), w in sorted(seen.items()))

        if mu is None:
            mu_arr = np.ones(self._n)
        else:
            mu_arr = np.asarray(mu, dtype=np.float64).copy()
            if mu_arr.shape != (self._n,):
                raise GraphError(f"measure has {mu_arr.size} entries, expected {self._n}")
            if not np.all(np.isfinite(mu_arr)) or np.any(mu_arr <= 0):
                raise GraphError("measure must be finite and > 0 at every vertex")
        self._mu = _readonly(mu_arr)

        if not nx.is_connected(self.to_networkx()):
            raise DisconnectedGraphError("graph is not connected")

        xs = np.array([e[0] for e in self._edges], dtype=np.int64)
        ys = np.array([e[1] for e in self._edges], dtype=np.int64)
        ws = np.array([e[2] for e in self._edges], dtype=np.float64)
        weights = sp.coo_matrix(
            (np.concatenate([ws, ws]), (np.concatenate([xs, ys]), np.concatenate([ys, xs]))),
            shape=(self._n, self._n),
        ).tocsr()
        weights.sort_indices()
        self._weights = weights
        self._rows = _readonly(np.repeat(np.arange(self._n), np.diff(weights.indptr)))
        self._cols = _readonly(weights.indices.astype(np.int64))
        self._w = _readonly(weights.data.copy())
        self._degree = _readonly(np.bincount(self._rows, weights=self._w, minlength=self._n))

    # ── basic data ──────────────────────────────────────────────────────

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Undirected edges (x < y), sorted."""
        return self._edges

    @property
    def mu(self) -> VertexField:
        return self._mu

    @property
    def degree(self) -> VertexField:
        """Weighted degree Σ_y w_xy (not divided by μ)."""
        return self._degree

    @property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, weights) over both orientations, CSR order."""
        return self._rows, self._cols, self._w

    @property
    def weight_matrix(self) -> sp.csr_matrix:
        return self._weights.copy()

    def combinatorial_laplacian(self) -> sp.csr_matrix:
        """Deg − W, symmetric positive semidefinite; μ·(−Δ) in matrix form."""
        return (sp.diags(self._degree) - self._weights).tocsr()

    def volume(self) -> float:
        return float(np.sum(self._mu))

    def neighbors(self, x: int) -> list[int]:
        lo, hi = self._weights.indptr[x], self._weights.indptr[x + 1]
        return [int(y) for y in self._weights.indices[lo:hi]]

    def weight(self, x: int, y: int) -> float:
        return float(self._weights[x, y])

    # ── fields ──────────────────────────────────────────────────────────

    def field(self, values: Union[Sequence[float], np.ndarray]) -> VertexField:
        """Validate values as a vertex field of this graph (copied, float64)."""
        arr = np.array(values, dtype=np.float64)
        return self.check_field(arr)

    def check_field(self, u: Any, name: str = "field") -> VertexField:
        arr = np.asarray(u, dtype=np.float64)
        if arr.shape != (self._n,):
            raise FieldAlignmentError(
                f"{name} has shape {arr.shape}, graph has {self._n} vertices"
            )
        if not np.all(np.isfinite(arr)):
            raise FieldAlignmentError(f"{name} contains NaN or infinite entries")
        return arr

    def check_vertex(self, p: Any) -> int:
        try:
            ok = not isinstance(p, bool) and int(p) == p and 0 <= int(p) < self._n
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise GraphError(f"vertex {p!r} outside 0..{self._n - 1}")
        return int(p)

    def ones(self) -> VertexField:
        return np.ones(self._n)

    def zeros(self) -> VertexField:
        return np.zeros(self._n)

    # ── conversions ─────────────────────────────────────────────────────

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self._n))
        g.add_weighted_edges_from(self._edges)
        return g

    def relabel(self, perm: Sequence[int]) -> "WeightedGraph":
        """Graph with vertex x renamed perm[x]."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self._n)):
            raise GraphError("relabel needs a permutation of 0..n-1")
        mu = np.empty(self._n)
        mu[perm] = self._mu
        return WeightedGraph(self._n, [(perm[x], perm[y], w) for x, y, w in self._edges], mu)

    def to_dict(self) -> dict:
        return {
            "n": self._n,
            "edges": [[x, y, w] for x, y, w in self._edges],
            "mu": [float(m) for m in self._mu],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedGraph":
        if not isinstance(d, dict) or "n" not in d or "edges" not in d:
            raise GraphError("graph JSON needs keys 'n' and 'edges'")
        return cls(d["n"], d["edges"], d.get("mu"))

    def graph_hash(self) -> str:
        """Deterministic hash of the normalised graph."""
        raw = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=True)
        return hashlib.sha256(raw.encode()).hexdigest()[:16]

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self._n}, edges={len(self._edges)}, volume={self.volume():g})"


def load_graph(path: Union[str, Path]) -> WeightedGraph:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphError(f"{path}: invalid JSON ({e})") from e
    return WeightedGraph.from_dict(data)


def dump_graph(g: WeightedGraph) -> str:
    return json.dumps(g.to_dict(), indent=2)


# ── generators ──────────────────────────────────────────────────────────


class GraphKind(str, Enum):
    TORUS = "torus"
    COMPLETE = "complete"
    CYCLE = "cycle"
    PATH = "path"
    RANDOM = "random"
    FROM_FILE = "from_file"


def _expand(value: Union[None, float, Sequence[float]], count: int, what: str) -> Optional[list]:
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return [float(value)] * count
    values = [float(v) for v in value]
    if len(values) != count:
        raise GraphError(f"{what} override has {len(values)} entries, expected {count}")
    return values


def _from_networkx(nxg: nx.Graph, weight=None, mu=None) -> WeightedGraph:
    nxg = nx.convert_node_labels_to_integers(nxg, ordering="sorted")
    pairs = sorted((min(x, y), max(x, y)) for x, y in nxg.edges())
    weights = _expand(weight, len(pairs), "weight")
    if weights is None:
        weights = [float(nxg.edges[x, y].get("weight", 1.0)) for x, y in pairs]
    mu_values = _expand(mu, nxg.number_of_nodes(), "mu")
    return WeightedGraph(
        nxg.number_of_nodes(),
        [(x, y, w) for (x, y), w in zip(pairs, weights)],
        mu_values,
    )


def generate_graph(kind: Union[GraphKind, str], **params) -> WeightedGraph:
    """
    Build a connected test graph with unit weights and μ ≡ 1 unless overridden.

    Params by kind: torus(m, k), complete(n), cycle(n), path(n),
    random(n, p, seed, random_weights), from_file(path). Every kind accepts
    ``weight`` and ``mu`` (scalar or per-edge / per-vertex list).
    """
    try:
        kind = GraphKind(kind)
    except ValueError:
        raise GraphError(f"unknown graph kind {kind!r}") from None
    weight = params.get("weight")
    mu = params.get("mu")

    if kind is GraphKind.FROM_FILE:
        g = load_graph(params["path"])
        if weight is None and mu is None:
            return g
        return WeightedGraph(
            g.n,
            [(x, y, w) for (x, y, _), w in zip(g.edges, _expand(weight, len(g.edges), "weight"))]
            if weight is not None else g.edges,
            _expand(mu, g.n, "mu") if mu is not None else g.mu,
        )

    if kind is GraphKind.TORUS:
        m, k = int(params["m"]), int(params["k"])
        if m * k < 2:
            raise GraphError(f"torus needs m*k >= 2, got {m}x{k}")
        if m < 3 or k < 3:
            # wraparound on a side of length 1 or 2 makes a loop or a duplicate edge
            raise GraphError(f"torus needs m, k >= 3 for distinct wraparound edges, got {m}x{k}")
        return _from_networkx(nx.grid_2d_graph(m, k, periodic=True), weight, mu)

    n = int(params["n"])
    if n < 2:
        raise GraphError(f"{kind.value} graph needs n >= 2, got {n}")
    if kind is GraphKind.COMPLETE:
        return _from_networkx(nx.complete_graph(n), weight, mu)
    if kind is GraphKind.PATH:
        return _from_networkx(nx.path_graph(n), weight, mu)
    if kind is GraphKind.CYCLE:
        if n < 3:
            raise GraphError(f"cycle({n}) would duplicate edge 0-1")
        return _from_networkx(nx.cycle_graph(n), weight, mu)

    # random
    p = float(params.get("p", 0.5))
    rng = np.random.default_rng(int(params.get("seed", 0)))
    for _ in range(1000):
        nxg = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        if nxg.number_of_edges() and nx.is_connected(nxg):
            break
    else:
        raise GraphError(f"no connected G({n}, {p}) sample in 1000 draws")
    if weight is None and params.get("random_weights"):
        weight = list(rng.uniform(0.5, 1.5, size=nxg.number_of_edges()))
    return _from_networkx(nxg, weight, mu)
