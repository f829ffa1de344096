"""Quadrature rules and sampling lattices on the reference triangle.

All rules are returned in barycentric form: ``(bary, weights)`` with
``bary`` of shape ``(npts, 3)`` and weights summing to one, so that

    int_T g  ~=  |T| * sum_q w_q g(x_q).
"""
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


def _s3(w, a):
    return [(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)], [w]


def _s21(w, a):
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)], [w] * 3


def _s111(w, a, b):
    c = 1.0 - a - b
    pts = [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
    return pts, [w] * 6


def _assemble(orbits):
    pts, wts = [], []
    for fn, args in orbits:
        p, w = fn(*args)
        pts += p
        wts += w
    return np.array(pts), np.array(wts)


# Dunavant (1985) symmetric rules.
_DUNAVANT = {
    4: [
        (_s21, (0.223381589678011, 0.445948490915965)),
        (_s21, (0.109951743655322, 0.091576213509771)),
    ],
    8: [
        (_s3, (0.144315607677787, None)),
        (_s21, (0.095091634267285, 0.459292588292723)),
        (_s21, (0.103217370534718, 0.170569307751760)),
        (_s21, (0.032458497623198, 0.050547228317031)),
        (_s111, (0.027230314174435, 0.263112829634638, 0.008394777409958)),
    ],
}


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Symmetric Dunavant rule exact for polynomials of ``degree`` (4 or 8).

    Lower degrees are served by the degree-4 rule.
    """
    if degree <= 4:
        key = 4
    elif degree <= 8:
        key = 8
    else:
        raise ValueError("no tabulated rule for degree %d; use collapsed_rule" % degree)
    bary, w = _assemble(_DUNAVANT[key])
    w = w / w.sum()  # tables carry 15 digits
    bary.setflags(write=False)
    w.setflags(write=False)
    return bary, w


@lru_cache(maxsize=None)
def collapsed_rule(degree):
    """Conical product rule (Duffy collapse of the square) exact to ``degree``.

    Built from Gauss-Legendre and Gauss-Jacobi(1, 0) nodes, so it shares no
    tabulated data with :func:`triangle_rule`.
    """
    n = degree // 2 + 1
    s, ws = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    # weight (1 - t) on [0, 1] from alpha=1 Jacobi on [-1, 1]
    t, wt = roots_jacobi(n, 1.0, 0.0)
    t = 0.5 * (t + 1.0)
    wt = wt / 4.0
    T, S = np.meshgrid(t, s, indexing="ij")
    WT, WS = np.meshgrid(wt, ws, indexing="ij")
    x = (T * 1.0).ravel()
    y = ((1.0 - T) * S).ravel()
    w = (WT * WS).ravel() * 2.0  # reference area 1/2 -> normalise to 1
    bary = np.column_stack([1.0 - x - y, x, y])
    return bary, w


@lru_cache(maxsize=None)
def gauss_segment(npts=3):
    """Gauss-Legendre points on [0, 1] with weights summing to one."""
    s, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (s + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def lattice(order):
    """Barycentric lattice ``{(i, j, k)/order : i + j + k = order}``.

    Contains the three vertices; ``(order + 1)(order + 2)/2`` points.
    """
    if order < 1:
        raise ValueError("lattice order must be >= 1")
    pts = [(order - i - j, i, j) for i in range(order + 1) for j in range(order + 1 - i)]
    bary = np.array(pts, dtype=float) / order
    bary.setflags(write=False)
    return bary


def monomial_integral(i, j, k):
    """Exact ``int_T l0^i l1^j l2^k / |T|`` = 2 i! j! k! / (i+j+k+2)!."""
    from math import factorial

    return 2.0 * factorial(i) * factorial(j) * factorial(k) / factorial(i + j + k + 2)
