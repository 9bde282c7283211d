"""Newton's method on Grassmann and Lagrange-Grassmann manifolds of
symmetric projection matrices: geometry, charts, matrix-equation solvers,
the two-chart Newton engine, and specialized eigenspace/invariant-subspace
algorithms."""

from .config import TOL, Tolerances
from .costs import (
    CostFunction,
    HamiltonianRayleighCost,
    InvariantSubspaceCost,
    RayleighCost,
    invariant_cost_ambient,
    riemannian_gradient_gr,
    riemannian_gradient_lg,
    riemannian_hessian_apply_gr,
    riemannian_hessian_apply_lg,
)
from .decomp import cholesky_upper, exp_skew_pair, expm_series, qr_positive, sym_eig
from .grassmann import (
    CHART_NAMES,
    GrTangent,
    OrthoFrame,
    Projector,
    chart_cayley,
    chart_exp,
    chart_qr,
    distance,
    frame_from_projector,
    geodesic,
    principal_angles,
    random_projector,
    tangent_project,
)
from .lagrange import (
    LagProjector,
    SymplecticFrame,
    lg_chart_cayley,
    lg_chart_exp,
    lg_chart_qr,
    lg_tangent_project,
    random_lag_projector,
    symplectic_frame_from_basis,
    sympl_form,
)
from .newton import (
    NewtonConfig,
    NewtonTrace,
    QuadraticRateEstimate,
    Status,
    algorithm1_step,
    algorithm2_step,
    algorithm3_step,
    estimate_quadratic_rate,
    newton_step_generic,
    perturb_frame,
    perturb_lag_frame,
    rate_from_trace,
    run_newton,
)
from .solvers import (
    SpectralGapReport,
    solve_dense,
    solve_invariant_newton_direct,
    solve_invariant_newton_recursive,
    solve_lyapunov,
    solve_sylvester,
)

__version__ = "0.1.0"
