"""P1 assembly of the convection-diffusion bilinear form and stabilisations.

The Galerkin form is

    B(u, v) = eps (grad u, grad v) + (a.grad u + (div a + b) u, v),

optionally augmented by streamline diffusion (SUPG) or continuous interior
penalty (CIP) terms.  Homogeneous Dirichlet conditions are imposed by
dropping boundary rows and columns.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .quadrature import gauss_segment, triangle_rule


class Stabilization(str, Enum):
    NONE = "none"
    SUPG = "supg"
    CIP = "cip"


@dataclass(frozen=True)
class StabilizationKind:
    """Which stabilisation to add and its scale constant.

    For SUPG ``scale`` multiplies the standard ``delta_T``; for CIP it is
    ``c`` in ``tau_E = c h_E^2``.
    """

    kind: Stabilization = Stabilization.NONE
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Stabilization(self.kind))
        if self.scale < 0:
            raise ValueError("stabilisation scale must be nonnegative")

    @classmethod
    def none(cls):
        return cls(Stabilization.NONE)

    @classmethod
    def supg(cls, scale=1.0):
        return cls(Stabilization.SUPG, scale)

    @classmethod
    def cip(cls, c_cip=0.01):
        return cls(Stabilization.CIP, c_cip)


@dataclass
class DiscreteField:
    """A P1 function given by its nodal values on ``mesh``."""

    mesh: object
    values: np.ndarray

    def gradients(self):
        """Elementwise constant gradients, shape (M, 2)."""
        return np.einsum("mi,mik->mk", self.values[self.mesh.triangles], self.mesh.bary_gradients)

    def at_bary(self, bary, elements=None):
        """Values at barycentric points ``bary`` (Q, 3) of every element: (M, Q)."""
        t = self.mesh.triangles if elements is None else self.mesh.triangles[elements]
        return self.values[t] @ np.asarray(bary).T


@dataclass
class SparseSystem:
    """Interior-DOF linear system ``matrix @ x = rhs``."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofs: np.ndarray          # mesh vertex index of each unknown
    n_vertices: int

    def to_field(self, mesh, x):
        values = np.zeros(self.n_vertices)
        values[self.dofs] = x
        return DiscreteField(mesh, values)


def xi(s):
    """``coth(s) - 1/s`` with a series branch for small ``s``."""
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 1e-4
    safe = np.where(small, 1.0, s)
    out = 1.0 / np.tanh(safe) - 1.0 / safe
    series = s / 3.0 - s ** 3 / 45.0
    out = np.where(small, series, out)
    return out if out.ndim else float(out)


def delta_supg(h_T, a_T, eps):
    """Streamline diffusion parameter ``h_T / a_T * xi(Pe_T / 2)``,
    ``Pe_T = a_T h_T / eps``."""
    h_T = np.asarray(h_T, dtype=float)
    a_T = np.asarray(a_T, dtype=float)
    pe = a_T * h_T / eps
    out = h_T / a_T * xi(0.5 * pe)
    return out if np.ndim(out) else float(out)


def _quad_points(mesh, bary):
    return np.einsum("qi,mik->mqk", bary, mesh.corners)


def element_convection_sup(mesh, problem, order=2):
    """``a_T = max |a|`` over vertices and a few interior points of each element."""
    from .quadrature import lattice

    pts = _quad_points(mesh, lattice(order))
    a1, a2 = problem.a(pts[..., 0], pts[..., 1])
    return np.sqrt(a1 ** 2 + a2 ** 2).max(axis=1)


def _coo(mesh, local):
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    return rows, cols, local.reshape(-1)


def element_matrices(mesh, problem, stab=None):
    """Local 3x3 matrices (M, 3, 3) and load vectors (M, 3).

    Entry ``[m, i, j]`` is the form applied to trial ``phi_j``, test ``phi_i``.
    """
    stab = stab or StabilizationKind.none()
    bary, w = triangle_rule(4)
    pts = _quad_points(mesh, bary)
    x, y = pts[..., 0], pts[..., 1]
    area = mesh.areas
    G = mesh.bary_gradients                              # (M, 3, 2)
    a1, a2 = problem.a(x, y)                             # (M, Q)
    c = problem.div_a(x, y) + problem.b(x, y)
    f = problem.f(x, y)
    wa = w[None, :] * area[:, None]                      # (M, Q)

    diff = problem.eps * area[:, None, None] * np.einsum("mik,mjk->mij", G, G)
    # a.grad phi_j at each point, (M, Q, 3)
    adphi = a1[..., None] * G[:, None, :, 0] + a2[..., None] * G[:, None, :, 1]
    phi = np.broadcast_to(bary, adphi.shape)
    trial = adphi + c[..., None] * phi
    conv = np.einsum("mq,mqi,mqj->mij", wa, phi, trial)
    K = diff + conv
    load = np.einsum("mq,mqi->mi", wa * f, phi)

    if stab.kind is Stabilization.SUPG and stab.scale > 0:
        delta = stab.scale * delta_supg(mesh.diameters, element_convection_sup(mesh, problem),
                                        problem.eps)
        # -eps Lap phi_j vanishes for P1
        K = K + delta[:, None, None] * np.einsum("mq,mqi,mqj->mij", wa, adphi, trial)
        load = load + delta[:, None] * np.einsum("mq,mqi->mi", wa * f, adphi)
    return K, load


def cip_matrix(mesh, problem, c_cip):
    """Edge penalty ``sum_E c h_E^2 int_E [a.grad u][a.grad v]`` as an
    (N x N) sparse matrix over all vertices."""
    ie = mesh.interior_edges
    if c_cip == 0 or len(ie) == 0:
        return sp.csr_matrix((mesh.n_vertices, mesh.n_vertices))
    s, w = gauss_segment(3)
    e = mesh.edges[ie]
    p0, p1 = mesh.vertices[e[:, 0]], mesh.vertices[e[:, 1]]
    pts = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]
    a1, a2 = problem.a(pts[..., 0], pts[..., 1])          # (E, Q)
    hE = mesh.edge_lengths[ie]
    tp, tm = mesh.edge_triangles[ie, 0], mesh.edge_triangles[ie, 1]
    Gp, Gm = mesh.bary_gradients[tp], mesh.bary_gradients[tm]
    # jump of a.grad phi for the six local basis functions (3 per side)
    gp = a1[..., None] * Gp[:, None, :, 0] + a2[..., None] * Gp[:, None, :, 1]
    gm = a1[..., None] * Gm[:, None, :, 0] + a2[..., None] * Gm[:, None, :, 1]
    g = np.concatenate([gp, -gm], axis=2)                  # (E, Q, 6)
    tau = c_cip * hE ** 2
    local = np.einsum("q,eqi,eqj->eij", w, g, g) * (tau * hE)[:, None, None]
    idx = np.concatenate([mesh.triangles[tp], mesh.triangles[tm]], axis=1)
    rows = np.repeat(idx, 6, axis=1).ravel()
    cols = np.tile(idx, (1, 6)).ravel()
    n = mesh.n_vertices
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def assemble_cip_term(mesh, problem, c_cip):
    """Alias of :func:`cip_matrix` kept for the documented API."""
    return cip_matrix(mesh, problem, c_cip)


def assemble_full(mesh, problem, stab=None):
    """Global matrix and load vector over all vertices (no boundary conditions)."""
    stab = stab or StabilizationKind.none()
    K, load = element_matrices(mesh, problem, stab)
    n = mesh.n_vertices
    rows, cols, vals = _coo(mesh, K)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if stab.kind is Stabilization.CIP:
        A = A + cip_matrix(mesh, problem, stab.scale)
    F = np.bincount(mesh.triangles.ravel(), weights=load.ravel(), minlength=n)
    return A.tocsr(), F


def assemble(mesh, problem, stab=None):
    """Assemble the interior-DOF system for homogeneous Dirichlet data."""
    A, F = assemble_full(mesh, problem, stab)
    dofs = mesh.interior_vertices
    Aii = A[dofs][:, dofs].tocsr()
    Aii.sort_indices()
    return SparseSystem(Aii, F[dofs], dofs, mesh.n_vertices)
