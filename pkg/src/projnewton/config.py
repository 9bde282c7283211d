"""Central numerical tolerances.

Every residual threshold used by the library, its self-checks and the CLI
lives here, so tests and runtime agree on a single source of truth.
Relative tolerances are understood with respect to a natural scale of the
quantity they guard (documented per field).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # relative symmetry / skewness defect of matrix inputs
    symmetry: float = 1e-12
    # ||Q^T Q - I|| for freshly computed orthogonal factors
    qr_orthogonality: float = 1e-12
    # relative factorization residuals (QR reconstruction, Cholesky)
    reconstruction: float = 1e-12
    # relative pivot floor below which a triangular factor counts as singular
    pivot: float = 1e-12
    # relative eigen-residual ||S V - V diag(w)||
    eig_residual: float = 1e-10
    # projector defects: ||P^2 - P||, |tr P - m|
    projector: float = 1e-10
    # ||Theta^T Theta - I|| of a frame accepted as orthogonal
    frame_orthogonality: float = 1e-10
    # ||Theta^T diag(I,0) Theta - P|| when rebuilding a frame from a projector
    frame_reconstruction: float = 1e-9
    # ||P J P|| for Lagrangian projectors, ||Theta^T J Theta - J|| for frames
    lagrangian: float = 1e-10
    # relative spectral-gap floor for Sylvester / Lyapunov solvability
    spectral_gap: float = 1e-8
    # condition-number ceiling for dense matrix-equation operators
    condition_limit: float = 1e12
    # central finite-difference step sizes (first / second derivatives)
    fd_step_first: float = 1e-4
    fd_step_second: float = 1e-3
    # frames are re-orthogonalized after this many accumulated factor products
    reorth_interval: int = 20


TOL = Tolerances()
