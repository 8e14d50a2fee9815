"""
Spectral constants of the μ-weighted Laplacian.

−Δ = M⁻¹L with M = diag(μ), L = Deg − W, is self-adjoint in the μ-inner
product; its spectrum is that of the symmetric matrix M^{-1/2} L M^{-1/2}.
Dense eigh is used up to DENSE_EIGEN_LIMIT vertices (O(n³)); above that a
shift-invert Lanczos solve for the two smallest eigenpairs.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from vortexforge.packages.errors import DisconnectedGraphError

from .weighted_graph import VertexField, WeightedGraph

DENSE_EIGEN_LIMIT = 4096
GAP_TOL = 1e-12


def _low_eigenpairs(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    scale = sp.diags(1.0 / np.sqrt(g.mu))
    sym = (scale @ g.combinatorial_laplacian() @ scale).tocsc()
    if g.n <= DENSE_EIGEN_LIMIT:
        vals, vecs = la.eigh(sym.toarray(), subset_by_index=[0, 1])
    else:
        vals, vecs = spla.eigsh(sym, k=2, sigma=-1.0, which="LM")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    return vals, vecs


def _checked_gap(g: WeightedGraph) -> tuple[float, np.ndarray]:
    vals, vecs = _low_eigenpairs(g)
    lam2 = float(vals[1])
    if lam2 <= GAP_TOL * max(1.0, float(np.max(g.degree / g.mu))):
        raise DisconnectedGraphError(f"spectral gap {lam2:.3e} is zero: graph is disconnected")
    return lam2, vecs[:, 1]


def spectral_gap(g: WeightedGraph) -> float:
    """Smallest nonzero eigenvalue λ₂ of −Δ."""
    return _checked_gap(g)[0]


def poincare_constant(g: WeightedGraph) -> float:
    """Optimal C with ∫u² dμ ≤ C ∫|∇u|² dμ for mean-zero u; equals 1/λ₂."""
    return 1.0 / spectral_gap(g)


def fiedler_vector(g: WeightedGraph) -> VertexField:
    """λ₂-eigenfunction of −Δ, normalised to ∫φ² dμ = 1 (sign: first nonzero entry > 0)."""
    _, vec = _checked_gap(g)
    phi = vec / np.sqrt(g.mu)
    phi = phi / np.sqrt(np.dot(g.mu, phi * phi))
    lead = phi[np.flatnonzero(np.abs(phi) > 1e-12)[0]]
    return phi if lead > 0 else -phi
