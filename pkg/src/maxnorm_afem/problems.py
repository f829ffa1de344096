"""Model problems  -eps Lap u + div(a u) + b u = f  on the unit square.

All evaluators take coordinate arrays ``x, y`` of matching shape and are
vectorised.  Exponentials are written with non-positive arguments so that
layer terms underflow quietly to zero instead of overflowing.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class Problem:
    """Coefficients, forcing and (optionally) the exact solution.

    ``a`` returns a pair ``(a1, a2)``; ``grad_u`` likewise.  ``laplace_u`` is
    only used by the forcing consistency checks.
    """

    name: str
    eps: float
    a: Callable
    div_a: Callable
    b: Callable
    f: Callable
    u: Optional[Callable] = None
    grad_u: Optional[Callable] = None
    laplace_u: Optional[Callable] = None

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1], got %r" % self.eps)

    @property
    def has_exact(self):
        return self.u is not None and self.grad_u is not None

    def residual_of_exact(self, x, y):
        """``-eps Lap u + a.grad u + (div a + b) u - f`` from the analytic
        derivatives; zero when ``f`` was derived correctly."""
        a1, a2 = self.a(x, y)
        ux, uy = self.grad_u(x, y)
        return (-self.eps * self.laplace_u(x, y) + a1 * ux + a2 * uy
                + (self.div_a(x, y) + self.b(x, y)) * self.u(x, y) - self.f(x, y))


def _const(c):
    return lambda x, y: np.full(np.shape(x), float(c))


def _a_up(x, y):
    z = np.zeros(np.shape(x))
    return z, z + 1.0


def problem_u1(eps):
    """Smooth solution ``sin(pi x) sin(pi y)``."""
    pi = np.pi

    def u(x, y):
        return np.sin(pi * x) * np.sin(pi * y)

    def grad_u(x, y):
        return (pi * np.cos(pi * x) * np.sin(pi * y),
                pi * np.sin(pi * x) * np.cos(pi * y))

    def laplace_u(x, y):
        return -2.0 * pi ** 2 * u(x, y)

    def f(x, y):
        return (2.0 * eps * pi ** 2 + 1.0) * u(x, y) + grad_u(x, y)[1]

    return Problem("u1", eps, _a_up, _const(0.0), _const(1.0), f, u, grad_u, laplace_u)


def problem_u2(eps):
    """Outflow layer at ``y = 1`` of width O(eps).

    ``u = x(1-x) g(y)`` with ``g(y) = y - (exp(-(1-y)/eps) - exp(-1/eps)) / (1 - exp(-1/eps))``.
    """
    e1 = np.exp(-1.0 / eps)
    denom = 1.0 - e1

    def layer(y):
        return np.exp(-np.maximum(1.0 - y, 0.0) / eps)

    def g(y):
        return y - (layer(y) - e1) / denom

    def g1(y):
        return 1.0 - layer(y) / (eps * denom)

    def g2(y):
        return -layer(y) / (eps * eps * denom)

    def u(x, y):
        return x * (1.0 - x) * g(y)

    def grad_u(x, y):
        return (1.0 - 2.0 * x) * g(y), x * (1.0 - x) * g1(y)

    def laplace_u(x, y):
        return -2.0 * g(y) + x * (1.0 - x) * g2(y)

    def f(x, y):
        # the O(1/eps) parts of -eps g'' and g' cancel exactly
        p = x * (1.0 - x)
        gy = g(y)
        return 2.0 * eps * gy + p + p * gy

    return Problem("u2", eps, _a_up, _const(0.0), _const(1.0), f, u, grad_u, laplace_u)


def problem_u3(eps):
    """Interior layer along ``x = 1/2`` of width O(sqrt(eps)).

    ``u = 2 x(1-x) y(1-y) (1 - tanh((1/2 - x)/sqrt(eps)))``.
    """
    se = np.sqrt(eps)

    def parts(x):
        z = (0.5 - x) / se
        th = np.tanh(z)
        q = np.exp(-2.0 * np.abs(z))
        sech2 = 4.0 * q / (1.0 + q) ** 2
        s = 1.0 - th
        s1 = sech2 / se
        s2 = 2.0 * sech2 * th / eps
        return s, s1, s2

    def u(x, y):
        s = parts(x)[0]
        return 2.0 * x * (1.0 - x) * y * (1.0 - y) * s

    def grad_u(x, y):
        s, s1, _ = parts(x)
        q, r = x * (1.0 - x), y * (1.0 - y)
        return 2.0 * r * ((1.0 - 2.0 * x) * s + q * s1), 2.0 * q * s * (1.0 - 2.0 * y)

    def laplace_u(x, y):
        s, s1, s2 = parts(x)
        q, r = x * (1.0 - x), y * (1.0 - y)
        return (2.0 * r * (-2.0 * s + 2.0 * (1.0 - 2.0 * x) * s1 + q * s2)
                - 4.0 * q * s)

    def f(x, y):
        return -eps * laplace_u(x, y) + grad_u(x, y)[1] + u(x, y)

    return Problem("u3", eps, _a_up, _const(0.0), _const(1.0), f, u, grad_u, laplace_u)


PROBLEMS = {"u1": problem_u1, "u2": problem_u2, "u3": problem_u3}


def get_problem(name, eps):
    """Look up a problem constructor by name (``"u1"``, ``"u2"``, ``"u3"``)."""
    try:
        return PROBLEMS[name](eps)
    except KeyError:
        raise ValueError("unknown problem %r; choose from %s" % (name, sorted(PROBLEMS))) from None
