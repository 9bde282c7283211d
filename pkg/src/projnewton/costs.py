"""Cost functions and their Riemannian gradients/Hessians on both manifolds.

A cost is described by its ambient data on symmetric matrices: a value, a
gradient, and the Hessian as an action (operator form) -- the Newton engine
only ever needs applications.  The Riemannian quantities are assembled from
the ambient ones with the tangent projections:

    Grassmann:  grad = [P, [P, grad_F]]
                Hess(xi) = [P, [P, Hess_F(xi)]] - [P, [grad_F, xi]]
    Lagrange:   grad = pi(grad_F)
                Hess(xi) = pi(Hess_F(xi)) - pi([P, [grad_F, xi]])

with pi(X) = (1/2)[P, [P, J X J + X]] on the Lagrange Grassmannian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .decomp import require_symmetric, symmetrize
from .errors import DimensionMismatch, NotSymmetric
from .grassmann import GrTangent, Projector, ad_squared, commutator
from .lagrange import LagProjector, lg_tangent_project, sympl_form

__all__ = [
    "CostFunction",
    "RayleighCost",
    "InvariantSubspaceCost",
    "HamiltonianRayleighCost",
    "invariant_cost_ambient",
    "riemannian_gradient_gr",
    "riemannian_hessian_apply_gr",
    "riemannian_gradient_lg",
    "riemannian_hessian_apply_lg",
]


class CostFunction:
    """Base interface: ambient value, gradient and Hessian action."""

    def value(self, p):
        raise NotImplementedError

    def ambient_gradient(self, p):
        raise NotImplementedError

    def ambient_hessian_apply(self, p, xi):
        raise NotImplementedError


@dataclass(frozen=True)
class RayleighCost(CostFunction):
    """Trace cost tr(A P) for symmetric A; maximized by the dominant
    m-dimensional eigenspace projector."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", require_symmetric(self.a, what="Rayleigh matrix"))

    def value(self, p):
        return float(np.trace(self.a @ p))

    def ambient_gradient(self, p):
        return self.a

    def ambient_hessian_apply(self, p, xi):
        return np.zeros_like(self.a)


@dataclass(frozen=True)
class InvariantSubspaceCost(CostFunction):
    """Residual cost ||(I - P) A P||^2 = tr((I - P) A P A^T) for arbitrary
    square A; zero exactly on projectors onto A-invariant subspaces."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
            raise DimensionMismatch("cost matrix must be square with finite entries")
        object.__setattr__(self, "a", a)

    def value(self, p):
        n = self.a.shape[0]
        return float(np.trace((np.eye(n) - p) @ self.a @ p @ self.a.T))

    def ambient_gradient(self, p):
        a = self.a
        n = a.shape[0]
        return symmetrize(a.T @ (np.eye(n) - p) @ a - a @ p @ a.T)

    def ambient_hessian_apply(self, p, xi):
        a = self.a
        return symmetrize(-a.T @ xi @ a - a @ xi @ a.T)


@dataclass(frozen=True)
class HamiltonianRayleighCost(CostFunction):
    """Trace cost tr(H P) on the Lagrange Grassmannian, with H symmetric
    Hamiltonian: H = [[S, T], [T, -S]] for symmetric S, T (J H J = H)."""

    h: np.ndarray

    def __post_init__(self):
        h = require_symmetric(self.h, what="Hamiltonian cost matrix")
        n2 = h.shape[0]
        if n2 % 2:
            raise DimensionMismatch("symmetric Hamiltonian must have even dimension")
        j = sympl_form(n2 // 2)
        defect = np.abs(j @ h @ j - h).max()
        if defect > TOL.lagrangian * max(1.0, np.abs(h).max()):
            raise NotSymmetric(f"JHJ - H residual {defect:.3e}; not symmetric Hamiltonian")
        object.__setattr__(self, "h", h)

    @classmethod
    def from_blocks(cls, s, t):
        s = require_symmetric(s, what="S block")
        t = require_symmetric(t, what="T block")
        return cls(np.block([[s, t], [t, -s]]))

    def value(self, p):
        return float(np.trace(self.h @ p))

    def ambient_gradient(self, p):
        return self.h

    def ambient_hessian_apply(self, p, xi):
        return np.zeros_like(self.h)


def invariant_cost_ambient(a, p):
    """Ambient gradient and Hessian action of the invariant-subspace cost at P:
    grad = A^T (I - P) A - A P A^T and Hess(xi) = -A^T xi A - A xi A^T."""
    cost = InvariantSubspaceCost(a)
    p = np.asarray(p, dtype=float)
    if p.shape != cost.a.shape:
        raise DimensionMismatch("point and cost matrix shapes differ")
    grad = cost.ambient_gradient(p)

    def hess_apply(xi):
        return cost.ambient_hessian_apply(p, np.asarray(xi, dtype=float))

    return grad, hess_apply


def riemannian_gradient_gr(cost: CostFunction, p: Projector) -> GrTangent:
    """[P, [P, grad_F(P)]], the tangent projection of the ambient gradient."""
    pm = p.mat
    grad = cost.ambient_gradient(pm)
    if grad.shape != pm.shape:
        raise DimensionMismatch("ambient gradient shape mismatch")
    return GrTangent(p, symmetrize(ad_squared(pm, grad)))


def riemannian_hessian_apply_gr(cost: CostFunction, p: Projector, xi) -> GrTangent:
    """Riemannian Hessian action on a tangent vector at P."""
    pm = p.mat
    xim = xi.mat if isinstance(xi, GrTangent) else np.asarray(xi, dtype=float)
    if xim.shape != pm.shape:
        raise DimensionMismatch("tangent vector shape mismatch")
    term = ad_squared(pm, cost.ambient_hessian_apply(pm, xim))
    term = term - commutator(pm, commutator(cost.ambient_gradient(pm), xim))
    return GrTangent(p, symmetrize(term))


def riemannian_gradient_lg(cost: CostFunction, p: LagProjector) -> np.ndarray:
    """pi(grad_F(P)) with the J-corrected tangent projection."""
    grad = cost.ambient_gradient(p.mat)
    if grad.shape != p.mat.shape:
        raise DimensionMismatch("ambient gradient shape mismatch")
    return lg_tangent_project(p, grad)


def riemannian_hessian_apply_lg(cost: CostFunction, p: LagProjector, xi) -> np.ndarray:
    """pi(Hess_F(P)(xi)) - pi([P, [grad_F(P), xi]])."""
    pm = p.mat
    xim = np.asarray(xi, dtype=float)
    if xim.shape != pm.shape:
        raise DimensionMismatch("tangent vector shape mismatch")
    hess = cost.ambient_hessian_apply(pm, xim)
    mixed = commutator(pm, commutator(cost.ambient_gradient(pm), xim))
    return lg_tangent_project(p, hess) - lg_tangent_project(p, mixed)
