"""Weighted seminorms of the convective derivative of the error ``e = u - u_h``.

For P1 approximations the test spaces in the dual-type definitions are the
constants, so the suprema are attained at ``psi = +-1/|T|`` and
``phi = +-1/|E|`` and reduce to

    |a.grad e|_{*;T} = alpha_T |int_T b_T a.grad e| / |T|,
    |a.grad e|_{*;E} = |sum_{+-} int_{T_E^+-} alpha_T b_E a.grad e| / (h_E^ |E|),

with element bubble ``b_T = (l0 l1 l2)^2`` and face bubble ``b_E = (l_A l_B)^2``
on the sub-triangles ``T_E^+-`` of height ``2 h_E^`` that share the edge ``E``.

Both bubbles are only fixed up to a constant.  ``bubble="raw"`` uses the
products above as written; ``bubble="unit"`` rescales them to have maximum
one (factors 729 and 16), which puts ``|.|_*`` on the same scale as
``|.|_**`` and the indicator.
"""
from dataclasses import dataclass

import numpy as np

from .assembly import DiscreteField
from .mesh import chunks
from .quadrature import lattice, triangle_rule


BUBBLE_SCALES = {"raw": (1.0, 1.0), "unit": (729.0, 16.0)}


def bubble_scales(bubble):
    """``(element, edge)`` bubble multipliers for a normalisation name."""
    try:
        return BUBBLE_SCALES[bubble]
    except KeyError:
        raise ValueError("bubble must be one of %s" % sorted(BUBBLE_SCALES)) from None


class ErrorField:
    """``e = u - u_h`` for an exact solution and a P1 field."""

    def __init__(self, mesh, u_h, problem):
        if not problem.has_exact:
            raise ValueError("problem %r has no exact solution" % problem.name)
        self.mesh = mesh
        self.u_h = u_h if isinstance(u_h, DiscreteField) else DiscreteField(mesh, np.asarray(u_h, float))
        self.problem = problem
        self.grad_h = self.u_h.gradients()

    def points(self, bary, elements=None):
        c = self.mesh.corners if elements is None else self.mesh.corners[elements]
        return np.einsum("qi,mik->mqk", np.asarray(bary, float), c)

    def values(self, bary, elements=None):
        """``e`` at barycentric points of the elements, shape (M, Q)."""
        pts = self.points(bary, elements)
        return self.problem.u(pts[..., 0], pts[..., 1]) - self.u_h.at_bary(bary, elements)

    def convective(self, x, y, elements):
        """``a.grad e`` at physical points ``(x, y)`` lying in ``elements``.

        ``elements`` broadcasts against the leading axis of ``x``.
        """
        ux, uy = self.problem.grad_u(x, y)
        a1, a2 = self.problem.a(x, y)
        g = self.grad_h[elements]
        return a1 * (ux - g[:, None, 0]) + a2 * (uy - g[:, None, 1])

    def convective_bary(self, bary, elements=None):
        if elements is None:
            elements = np.arange(self.mesh.n_triangles)
        pts = self.points(bary, elements)
        return self.convective(pts[..., 0], pts[..., 1], elements)


@dataclass
class EdgeSubsimplexPair:
    """Sub-triangles ``T_E^+-`` (rows: A, B, apex) for a batch of interior edges."""

    edges: np.ndarray           # global edge indices
    parents: np.ndarray         # (K, 2) parent triangles (+, -)
    corners: np.ndarray         # (K, 2, 3, 2) sub-triangle vertices
    h_hat: np.ndarray           # (K,)
    edge_length: np.ndarray     # (K,)

    @property
    def areas(self):
        c = self.corners
        d1 = c[..., 1, :] - c[..., 0, :]
        d2 = c[..., 2, :] - c[..., 0, :]
        return 0.5 * np.abs(d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])


def edge_subsimplices(mesh, eps, edges=None):
    """Construct ``T_E^+-`` with ``|T_E^+-| = h^_E |E|`` for interior edges.

    ``h^_E = min(sqrt(eps), |T+|/|E|, |T-|/|E|)``.  The apex lies on the
    median of the parent from the edge midpoint towards the opposite vertex.
    """
    if edges is None:
        edges = mesh.interior_edges
    edges = np.atleast_1d(np.asarray(edges, dtype=np.int64))
    if np.any(mesh.boundary_edges[edges]):
        raise ValueError("sub-simplices are only defined for interior edges")
    par = mesh.edge_triangles[edges]
    loc = mesh.edge_local[edges]
    L = mesh.edge_lengths[edges]
    area = mesh.areas[par]                                   # (K, 2)
    h_hat = np.minimum(np.sqrt(eps), (area / L[:, None]).min(axis=1))
    A = mesh.vertices[mesh.edges[edges, 0]]
    B = mesh.vertices[mesh.edges[edges, 1]]
    mid = 0.5 * (A + B)
    opp = mesh.vertices[mesh.triangles[par, loc]]             # (K, 2, 2)
    theta = np.minimum(h_hat[:, None] * L[:, None] / area, 1.0)
    apex = mid[:, None, :] + theta[..., None] * (opp - mid[:, None, :])
    corners = np.stack([np.broadcast_to(A[:, None, :], apex.shape),
                        np.broadcast_to(B[:, None, :], apex.shape), apex], axis=2)
    return EdgeSubsimplexPair(edges, par, corners, h_hat, L)


def star_element(error, alpha, t=None, rule=None, elements=None, scale=1.0):
    """``|a.grad e|_{*;T}`` for all elements (or element ``t``).

    ``scale`` multiplies the bubble ``(l0 l1 l2)^2``.
    """
    bary, w = rule or triangle_rule(8)
    bubble = scale * np.prod(bary, axis=1) ** 2
    if t is not None:
        elements = np.array([t])
    adv = error.convective_bary(bary, elements)
    a = np.asarray(alpha) if elements is None else np.asarray(alpha)[elements]
    vals = a * np.abs(adv @ (w * bubble))
    return vals if t is None else float(vals[0])


def star_edge(error, eps, alpha, edges=None, rule=None, scale=1.0):
    """``|a.grad e|_{*;E}`` for interior edges (all of them by default).

    ``scale`` multiplies the face bubble ``(l_A l_B)^2``.
    """
    mesh = error.mesh
    pair = edge_subsimplices(mesh, eps, edges)
    if len(pair.edges) == 0:
        return np.zeros(0)
    bary, w = rule or triangle_rule(8)
    bubble = scale * (bary[:, 0] * bary[:, 1]) ** 2
    alpha = np.asarray(alpha)
    total = np.zeros(len(pair.edges))
    for side in range(2):
        c = pair.corners[:, side]                              # (K, 3, 2)
        pts = np.einsum("qi,kij->kqj", bary, c)
        parent = pair.parents[:, side]
        adv = error.convective(pts[..., 0], pts[..., 1], parent)
        area = pair.areas[:, side]
        total += alpha[parent] * area * (adv @ (w * bubble))
    return np.abs(total) / (pair.h_hat * pair.edge_length)


@dataclass
class SeminormReport:
    err_max: float
    star: float
    starstar: float
    star_elements: np.ndarray
    star_edges: np.ndarray
    proj_term: float
    osc_term: float


def star_global(star_elements, star_edges):
    """``max_T |.|_{*;T} + max_E |.|_{*;E}``."""
    se = float(np.max(star_elements)) if len(star_elements) else 0.0
    sd = float(np.max(star_edges)) if len(star_edges) else 0.0
    return se + sd


def starstar_elements(error, alpha, sample_order=4, elements=None):
    adv = error.convective_bary(lattice(sample_order), elements)
    a = np.asarray(alpha) if elements is None else np.asarray(alpha)[elements]
    return a * np.abs(adv).max(axis=1)


def starstar_global(error, alpha, sample_order=4):
    """``max_T alpha_T max_T |a.grad e|`` on the sampling lattice."""
    return float(starstar_elements(error, alpha, sample_order).max())


def maxnorm_error(error, sample_order=4, elements=None):
    """``max |u - u_h|`` over per-element sampling lattices (vertices included)."""
    return float(np.abs(error.values(lattice(sample_order), elements)).max())


def projection_comparison_terms(error, alpha, sample_order=4, elements=None):
    """Per element ``alpha ||a.grad e - P0(a.grad e)||_inf`` and ``alpha |P0(a.grad e)|``.

    Returns ``(osc_term, proj_term)``; ``P0`` is the element mean.
    """
    bq, wq = triangle_rule(8)
    mean = error.convective_bary(bq, elements) @ wq
    adv = error.convective_bary(lattice(sample_order), elements)
    a = np.asarray(alpha) if elements is None else np.asarray(alpha)[elements]
    osc = a * np.abs(adv - mean[:, None]).max(axis=1)
    proj = a * np.abs(mean)
    return osc, proj


def seminorm_report(mesh, u_h, problem, alpha, sample_order=4, bubble="unit"):
    """All error quantities used in convergence tables."""
    s_T, s_E = bubble_scales(bubble)
    err = ErrorField(mesh, u_h, problem)
    m = mesh.n_triangles
    s_el = np.empty(m)
    err_max = starstar = proj = osc = 0.0
    for idx in chunks(m):
        s_el[idx] = star_element(err, alpha, elements=idx, scale=s_T)
        err_max = max(err_max, maxnorm_error(err, sample_order, idx))
        starstar = max(starstar, float(starstar_elements(err, alpha, sample_order, idx).max()))
        o, p = projection_comparison_terms(err, alpha, sample_order, idx)
        osc, proj = max(osc, float(o.max())), max(proj, float(p.max()))
    ie = mesh.interior_edges
    s_ed = np.concatenate([star_edge(err, problem.eps, alpha, ie[idx], scale=s_E)
                           for idx in chunks(len(ie))]) if len(ie) else np.zeros(0)
    return SeminormReport(err_max, star_global(s_el, s_ed), starstar, s_el, s_ed, proj, osc)
