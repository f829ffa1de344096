"""Maximum-norm residual indicators for P1 approximations.

For each element ``T``

    eta(T) = alpha_T ||R_h||_{inf;T} + beta_T ||[grad u_h]||_{inf; dT minus boundary}

with ``R_h = div(a u_h) + b u_h - f`` (``eps Lap u_h`` vanishes for P1),

    alpha_T = min(1, c_vol * ell_h * h_T^2 / eps),
    beta_T  = min(sqrt(eps), c_jump * ell_h * h_T),
    ell_h   = 1 + ln(2 + eps / h_min) + |ln eps|.

Sup-norms over elements are taken on a barycentric sampling lattice.
"""
from dataclasses import dataclass, field

import numpy as np

from .assembly import DiscreteField
from .mesh import chunks, min_diameter
from .quadrature import lattice, triangle_rule


@dataclass(frozen=True)
class EstimatorConfig:
    c_vol: float = 0.0125
    c_jump: float = 0.03
    sample_order: int = 4

    def __post_init__(self):
        if self.c_vol <= 0 or self.c_jump <= 0:
            raise ValueError("estimator constants must be positive")
        if self.sample_order < 1:
            raise ValueError("sample_order must be >= 1")


@dataclass
class IndicatorReport:
    """Per-element indicator parts plus global maxima."""

    eta: np.ndarray
    volume: np.ndarray
    jump: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    residual_max: np.ndarray
    jump_max: np.ndarray
    osc: np.ndarray
    ell_h: float
    eta_max: float = field(init=False)
    osc_max: float = field(init=False)

    def __post_init__(self):
        self.eta_max = float(self.eta.max()) if self.eta.size else 0.0
        self.osc_max = float(self.osc.max()) if self.osc.size else 0.0

    def osc_patch(self, mesh):
        """``max_{T' in patch(T)} osc(T')`` for every element."""
        vmax = np.zeros(mesh.n_vertices)
        np.maximum.at(vmax, mesh.triangles.ravel(), np.repeat(self.osc, 3))
        return vmax[mesh.triangles].max(axis=1)


def log_factor(eps, h_min):
    """``1 + ln(2 + eps / h_min) + |ln eps|``."""
    if h_min <= 0 or eps <= 0:
        raise ValueError("eps and h_min must be positive")
    return 1.0 + np.log(2.0 + eps / h_min) + abs(np.log(eps))


def weights(eps, h_T, ell_h, config=None):
    config = config or EstimatorConfig()
    h_T = np.asarray(h_T, dtype=float)
    alpha = np.minimum(1.0, config.c_vol * ell_h * h_T ** 2 / eps)
    beta = np.minimum(np.sqrt(eps), config.c_jump * ell_h * h_T)
    if alpha.ndim == 0:
        return float(alpha), float(beta)
    return alpha, beta


def _as_field(mesh, u_h):
    return u_h if isinstance(u_h, DiscreteField) else DiscreteField(mesh, np.asarray(u_h, float))


def residual_at(mesh, u_h, problem, bary, elements=None, grad=None):
    """``R_h`` at barycentric points ``bary`` of the elements, shape (M, Q)."""
    uh = _as_field(mesh, u_h)
    bary = np.asarray(bary, dtype=float)
    corners = mesh.corners if elements is None else mesh.corners[elements]
    pts = np.einsum("qi,mik->mqk", bary, corners)
    x, y = pts[..., 0], pts[..., 1]
    if grad is None:
        grad = uh.gradients()
    if elements is not None:
        grad = grad[elements]
    a1, a2 = problem.a(x, y)
    adu = a1 * grad[:, None, 0] + a2 * grad[:, None, 1]
    vals = uh.at_bary(bary, elements)
    return adu + (problem.div_a(x, y) + problem.b(x, y)) * vals - problem.f(x, y)


def element_residual_maxnorm(mesh, u_h, problem, sample_order=4, t=None):
    """Sampled ``||R_h||_{inf;T}``; all elements, or just element ``t``."""
    R = residual_at(mesh, u_h, problem, lattice(sample_order))
    rmax = np.abs(R).max(axis=1)
    return rmax if t is None else float(rmax[t])


def edge_jumps(mesh, u_h):
    """``[grad u_h] = (grad u+ - grad u-) . n+`` on every edge (0 on the boundary)."""
    uh = _as_field(mesh, u_h)
    grad = uh.gradients()
    ie = mesh.interior_edges
    tp, tm = mesh.edge_triangles[ie, 0], mesh.edge_triangles[ie, 1]
    n = mesh.outward_normals[tp, mesh.edge_local[ie, 0]]
    J = np.zeros(mesh.n_edges)
    J[ie] = np.einsum("ek,ek->e", grad[tp] - grad[tm], n)
    return J


def jump_maxnorm(mesh, u_h, t=None):
    """Max over the interior edges of each element of ``|[grad u_h]|``."""
    J = np.abs(edge_jumps(mesh, u_h))
    jm = J[mesh.triangle_edges].max(axis=1)
    return jm if t is None else float(jm[t])


def oscillation(mesh, u_h, problem, alpha, sample_order=4, t=None):
    """``alpha_T ||R_h - mean_T R_h||_{inf;T}`` per element (P1: the
    L2 projection onto constants is the mean)."""
    bq, wq = triangle_rule(4)
    mean = residual_at(mesh, u_h, problem, bq) @ wq
    R = residual_at(mesh, u_h, problem, lattice(sample_order))
    osc = np.asarray(alpha) * np.abs(R - mean[:, None]).max(axis=1)
    return osc if t is None else float(osc[t])


def indicator_report(mesh, u_h, problem, config=None):
    """All indicator parts on ``mesh`` for the discrete solution ``u_h``."""
    config = config or EstimatorConfig()
    uh = _as_field(mesh, u_h)
    eps = problem.eps
    ell = log_factor(eps, min_diameter(mesh))
    alpha, beta = weights(eps, mesh.diameters, ell, config)

    bq, wq = triangle_rule(4)
    grad = uh.gradients()
    rmax = np.empty(mesh.n_triangles)
    dev = np.empty(mesh.n_triangles)
    for idx in chunks(mesh.n_triangles):
        mean = residual_at(mesh, uh, problem, bq, idx, grad) @ wq
        R = residual_at(mesh, uh, problem, lattice(config.sample_order), idx, grad)
        rmax[idx] = np.abs(R).max(axis=1)
        dev[idx] = np.abs(R - mean[:, None]).max(axis=1)
    osc = alpha * dev
    jmax = jump_maxnorm(mesh, uh)
    volume = alpha * rmax
    jump = beta * jmax
    return IndicatorReport(volume + jump, volume, jump, alpha, beta, rmax, jmax, osc, ell)
