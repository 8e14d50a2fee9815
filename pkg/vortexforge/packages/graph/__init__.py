"""Weighted graphs and the discrete calculus on them."""
from .calculus import (
    dirac_mass,
    gradient_form,
    gradient_norm,
    integrate,
    laplacian_apply,
    norm_p,
    sobolev_norm,
    volume,
)
from .spectral import fiedler_vector, poincare_constant, spectral_gap
from .weighted_graph import (
    GraphKind,
    VertexField,
    WeightedGraph,
    dump_graph,
    generate_graph,
    load_graph,
)

__all__ = [
    "WeightedGraph", "VertexField", "GraphKind", "generate_graph", "load_graph", "dump_graph",
    "laplacian_apply", "gradient_form", "gradient_norm", "integrate", "volume", "norm_p",
    "sobolev_norm", "dirac_mass", "poincare_constant", "spectral_gap", "fiedler_vector",
]
