"""
Energy functional of the reduced equation and its derivatives.

    I(v) = ∫ ½|∇v|² + (λ/6)(e^{u₀+v} − 1)⁶ + (4πN/Vol(V))·v  dμ

Gradients are coordinate gradients (they already carry the factor μ), so
directional derivatives are plain dot products: dI(v)[φ] = ⟨∇I(v), φ⟩.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from vortexforge.packages.chern_simons import VortexProblem, nonlinearity_F, nonlinearity_F_prime
from vortexforge.packages.errors import EnergyOverflowError
from vortexforge.packages.graph import VertexField, gradient_form, integrate, laplacian_apply


def energy(prob: VortexProblem, u0, v) -> float:
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    v = g.check_field(v, "v")
    with np.errstate(over="ignore", invalid="ignore"):
        sixth = np.expm1(u0 + v) ** 6
        density = 0.5 * gradient_form(g, v, v) + (prob.lam / 6.0) * sixth + prob.source_density * v
    if not np.all(np.isfinite(density)):
        raise EnergyOverflowError(
            f"energy saturates: max(u0 + v) = {float(np.max(u0 + v)):.3g} overflows (e^u - 1)^6"
        )
    return float(np.dot(g.mu, density))


def energy_gradient(prob: VortexProblem, u0, v) -> VertexField:
    """μ(x)·[−Δv + λF(u₀ + v) + 4πN/Vol(V)]; vanishes exactly at solutions."""
    g = prob.graph
    u0 = g.check_field(u0, "u0")
    v = g.check_field(v, "v")
    return g.mu * (-laplacian_apply(g, v) + prob.lam * nonlinearity_F(u0 + v)
                   + prob.source_density)


def energy_hessian(prob: VortexProblem, u0, v) -> sp.csr_matrix:
    """Coordinate Hessian L + diag(μ·λ·F′(u₀ + v)), L = Deg − W."""
    g = prob.graph
    u = g.check_field(u0, "u0") + g.check_field(v, "v")
    return (g.combinatorial_laplacian()
            + sp.diags(g.mu * prob.lam * nonlinearity_F_prime(u))).tocsr()


def hessian_min_eigenvalue(prob: VortexProblem, u0, v) -> float:
    """
    Smallest Hessian eigenvalue at v.

    Positive means v is a strict local minimum; a critical point with a zero or
    negative value is either degenerate or a saddle.
    """
    h = energy_hessian(prob, u0, v).toarray()
    return float(la.eigh(h, eigvals_only=True, subset_by_index=[0, 0])[0])


def translation_gap(prob: VortexProblem, u0, v, shift: float) -> float:
    """(λ/6)∫[(e^{u₀+v−c} − 1)⁶ − (e^{u₀+v} − 1)⁶] dμ, i.e. I(v − c) − I(v) + 4πNc."""
    g = prob.graph
    u = g.check_field(u0, "u0") + g.check_field(v, "v")
    return (prob.lam / 6.0) * integrate(g, np.expm1(u - shift) ** 6 - np.expm1(u) ** 6)
