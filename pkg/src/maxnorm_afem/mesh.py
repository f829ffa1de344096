"""Conforming triangulations with newest-vertex bisection.

Every triangle is stored as ``(v0, v1, v2)`` in counter-clockwise order, with
``v0`` the *newest vertex*; its opposite edge ``(v1, v2)`` is the refinement
edge.  Local edge ``i`` of a triangle is the edge opposite local vertex ``i``,
so the refinement edge is always local edge 0.

Meshes are immutable: :func:`bisect` returns a new :class:`Mesh`.
"""
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    """Raised for invalid mesh input (degenerate or misoriented triangles)."""


def _readonly(a):
    a.setflags(write=False)
    return a


class Mesh:
    """Conforming triangle mesh with edge adjacency.

    Parameters
    ----------
    vertices : array_like, shape (N, 2)
    triangles : array_like of int, shape (M, 3)
        Counter-clockwise vertex triples, newest vertex first.

    Attributes
    ----------
    edges : ndarray, shape (E, 2)
        Sorted vertex pairs.
    edge_triangles : ndarray, shape (E, 2)
        Incident triangles; the second entry is -1 on boundary edges.
    edge_local : ndarray, shape (E, 2)
        Local edge index of the edge in each incident triangle (-1 if none).
    triangle_edges : ndarray, shape (M, 3)
        Global edge index of local edge ``i`` (opposite local vertex ``i``).
    """

    def __init__(self, vertices, triangles):
        p = np.ascontiguousarray(vertices, dtype=float)
        t = np.ascontiguousarray(triangles, dtype=np.int64)
        if p.ndim != 2 or p.shape[1] != 2:
            raise MeshError("vertices must have shape (N, 2)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must have shape (M, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(p)):
            raise MeshError("triangle references a nonexistent vertex")
        self.vertices = _readonly(p)
        self.triangles = _readonly(t)
        if np.any(self.signed_areas <= 0.0):
            raise MeshError("degenerate or clockwise triangle in input")
        self._build_edges()

    def _build_edges(self):
        t = self.triangles
        m = len(t)
        # local edge i is opposite vertex i
        pairs = np.stack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]], axis=1).reshape(-1, 2)
        pairs = np.sort(pairs, axis=1)
        nv = len(self.vertices)
        keys, inverse, counts = np.unique(pairs[:, 0] * nv + pairs[:, 1],
                                          return_inverse=True, return_counts=True)
        edges = np.column_stack([keys // nv, keys % nv])
        inverse = inverse.ravel()
        if np.any(counts > 2):
            raise MeshError("edge shared by more than two triangles")
        tri_of = np.repeat(np.arange(m), 3)
        loc_of = np.tile(np.arange(3), m)
        order = np.argsort(inverse, kind="stable")
        first = np.zeros(len(edges) + 1, dtype=np.int64)
        np.cumsum(counts, out=first[1:])
        et = -np.ones((len(edges), 2), dtype=np.int64)
        el = -np.ones((len(edges), 2), dtype=np.int64)
        et[:, 0] = tri_of[order[first[:-1]]]
        el[:, 0] = loc_of[order[first[:-1]]]
        two = counts == 2
        et[two, 1] = tri_of[order[first[:-1][two] + 1]]
        el[two, 1] = loc_of[order[first[:-1][two] + 1]]
        self.edges = _readonly(edges.astype(np.int64))
        self.edge_triangles = _readonly(et)
        self.edge_local = _readonly(el)
        self.triangle_edges = _readonly(inverse.reshape(m, 3).astype(np.int64))
        self.boundary_edges = _readonly(~two)
        bv = np.zeros(len(self.vertices), dtype=bool)
        bv[edges[~two].ravel()] = True
        self.boundary_vertices = _readonly(bv)

    def __repr__(self):
        return "Mesh(%d vertices, %d triangles, %d edges)" % (
            self.n_vertices, self.n_triangles, self.n_edges)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def interior_vertices(self):
        return np.flatnonzero(~self.boundary_vertices)

    @property
    def interior_edges(self):
        return np.flatnonzero(~self.boundary_edges)

    @cached_property
    def corners(self):
        """Vertex coordinates per triangle, shape (M, 3, 2)."""
        return _readonly(self.vertices[self.triangles])

    @cached_property
    def signed_areas(self):
        c = self.vertices[self.triangles]
        d1 = c[:, 1] - c[:, 0]
        d2 = c[:, 2] - c[:, 0]
        return _readonly(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))

    @property
    def areas(self):
        return self.signed_areas

    @cached_property
    def edge_vectors(self):
        """Vector along local edge i, from vertex i+1 to vertex i+2; (M, 3, 2)."""
        c = self.corners
        return _readonly(c[:, [2, 0, 1]] - c[:, [1, 2, 0]])

    @cached_property
    def local_edge_lengths(self):
        return _readonly(np.linalg.norm(self.edge_vectors, axis=2))

    @cached_property
    def diameters(self):
        """``h_T``: the longest edge of each triangle."""
        return _readonly(self.local_edge_lengths.max(axis=1))

    @cached_property
    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return _readonly(np.linalg.norm(d, axis=1))

    @cached_property
    def bary_gradients(self):
        """Gradients of the barycentric coordinates, shape (M, 3, 2)."""
        ev = self.edge_vectors
        # grad l_i = rot(edge_i) / (2|T|), rot(x, y) = (y, -x) for CCW input
        g = np.stack([ev[..., 1], -ev[..., 0]], axis=-1)
        return _readonly(-g / (2.0 * self.areas)[:, None, None])

    @cached_property
    def outward_normals(self):
        """Unit outward normal of local edge i, shape (M, 3, 2)."""
        g = self.bary_gradients
        return _readonly(-g / np.linalg.norm(g, axis=2, keepdims=True))

    @cached_property
    def centroids(self):
        return _readonly(self.corners.mean(axis=1))

    @cached_property
    def vertex_triangle_incidence(self):
        m = self.n_triangles
        rows = np.repeat(np.arange(m), 3)
        return sp.csr_matrix((np.ones(3 * m), (rows, self.triangles.ravel())),
                             shape=(m, self.n_vertices))

    def check_conformity(self):
        """Raise :class:`MeshError` if the mesh has a hanging node.

        Assumes the domain is an axis-aligned rectangle: a hanging node leaves
        a one-sided edge strictly inside the domain.
        """
        be = self.edges[self.boundary_edges]
        mid = 0.5 * (self.vertices[be[:, 0]] + self.vertices[be[:, 1]])
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        tol = 1e-12 * max(1.0, float(np.abs(self.vertices).max()))
        on_box = (np.abs(mid - lo) < tol).any(axis=1) | (np.abs(mid - hi) < tol).any(axis=1)
        if not np.all(on_box):
            raise MeshError("hanging node: %d boundary edges inside the domain"
                            % int((~on_box).sum()))


def structured_unit_square(n):
    """``2 n^2`` right triangles on an ``n x n`` grid of the unit square.

    Every cell is cut along its lower-left to upper-right diagonal; the
    diagonals are the refinement edges (right-angle vertex is newest).
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    x = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(x, x, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    p00 = (j * (n + 1) + i).ravel()
    p10 = p00 + 1
    p01 = p00 + n + 1
    p11 = p01 + 1
    lower = np.column_stack([p10, p11, p00])
    upper = np.column_stack([p01, p00, p11])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return Mesh(vertices, triangles)


def _bisect_once(mesh, marked_edges, counts):
    """One closure-consistent bisection pass.

    ``marked_edges`` is closed under "a triangle with any marked edge has its
    refinement edge marked".  Returns the new mesh and inherited counts.
    """
    t = mesh.triangles
    te = mesh.triangle_edges
    ne = mesh.n_vertices
    edge_mid = -np.ones(mesh.n_edges, dtype=np.int64)
    idx = np.flatnonzero(marked_edges)
    edge_mid[idx] = ne + np.arange(len(idx))
    e = mesh.edges[idx]
    new_vertices = np.vstack([mesh.vertices, 0.5 * (mesh.vertices[e[:, 0]] + mesh.vertices[e[:, 1]])])

    m0 = edge_mid[te[:, 0]]
    m1 = edge_mid[te[:, 1]]
    m2 = edge_mid[te[:, 2]]
    v0, v1, v2 = t[:, 0], t[:, 1], t[:, 2]

    keep = m0 < 0
    split = ~keep
    left_split = split & (m2 >= 0)    # child (m0, v0, v1) is bisected again
    right_split = split & (m1 >= 0)   # child (m0, v2, v0) is bisected again

    blocks, parents = [], []

    def add(mask, tri):
        blocks.append(np.column_stack(tri)[mask])
        parents.append(np.flatnonzero(mask))

    add(keep, (v0, v1, v2))
    lonly = split & ~left_split
    add(lonly, (m0, v0, v1))
    add(left_split, (m2, m0, v0))
    add(left_split, (m2, v1, m0))
    ronly = split & ~right_split
    add(ronly, (m0, v2, v0))
    add(right_split, (m1, v0, m0))
    add(right_split, (m1, m0, v2))

    new_t = np.vstack(blocks)
    parent = np.concatenate(parents)
    new_counts = np.maximum(counts[parent] - np.where(split[parent], 1, 0), 0)
    return Mesh(new_vertices, new_t), new_counts


def _close_marks(mesh, marked_edges):
    te = mesh.triangle_edges
    ref = te[:, 0]
    while True:
        need = marked_edges[te].any(axis=1) & ~marked_edges[ref]
        if not need.any():
            return marked_edges
        marked_edges[ref[need]] = True


def bisect(mesh, marks):
    """Newest-vertex bisection with conforming closure.

    Parameters
    ----------
    mesh : Mesh
    marks : dict or array_like
        Either a ``{triangle: k}`` mapping or a length-``M`` integer array of
        bisection counts.  Each marked triangle is bisected ``k`` times
        (its descendants carry the remaining count); neighbours are bisected
        as needed to remove hanging nodes.

    Returns
    -------
    Mesh
        A new mesh; ``mesh`` itself is returned when nothing is marked.
    """
    counts = np.zeros(mesh.n_triangles, dtype=np.int64)
    if isinstance(marks, dict):
        for tri, k in marks.items():
            if not 0 <= tri < mesh.n_triangles:
                raise IndexError("triangle index %d out of range" % tri)
            if k < 0:
                raise ValueError("bisection counts must be nonnegative")
            counts[tri] = k
    else:
        counts[:] = np.asarray(marks, dtype=np.int64)
        if np.any(counts < 0):
            raise ValueError("bisection counts must be nonnegative")
    while counts.any():
        marked = np.zeros(mesh.n_edges, dtype=bool)
        marked[mesh.triangle_edges[counts > 0, 0]] = True
        marked = _close_marks(mesh, marked)
        mesh, counts = _bisect_once(mesh, marked, counts)
    return mesh


def uniform_refine(mesh, times=1):
    """Bisect every triangle ``times`` times."""
    return bisect(mesh, np.full(mesh.n_triangles, times))


def element_geometry(mesh, t):
    """Area, diameter, edge lengths and unit outward normals of triangle ``t``.

    Edge ``i`` is opposite local vertex ``i``.
    """
    return (float(mesh.areas[t]), float(mesh.diameters[t]),
            mesh.local_edge_lengths[t].copy(), mesh.outward_normals[t].copy())


def patch(mesh, t):
    """Indices of all triangles sharing at least one vertex with ``t``."""
    inc = mesh.vertex_triangle_incidence
    verts = mesh.triangles[t]
    tris = inc[:, verts].nonzero()[0]
    return set(np.unique(tris).tolist())


def min_diameter(mesh):
    """The smallest element diameter of the mesh."""
    return float(mesh.diameters.min())


def min_angle(mesh):
    """Smallest interior angle over all triangles, in radians."""
    ev = mesh.edge_vectors
    L = mesh.local_edge_lengths
    # angle at vertex i lies between edges i+1 and i+2
    a = ev[:, [1, 2, 0]]
    b = ev[:, [2, 0, 1]]
    cosang = -(a * b).sum(axis=2) / (L[:, [1, 2, 0]] * L[:, [2, 0, 1]])
    return float(np.arccos(np.clip(cosang, -1.0, 1.0)).min())


CHUNK = 131072


def chunks(n, size=CHUNK):
    """Index blocks covering ``range(n)``; keeps temporaries bounded on big meshes."""
    for lo in range(0, n, size):
        yield np.arange(lo, min(lo + size, n))
