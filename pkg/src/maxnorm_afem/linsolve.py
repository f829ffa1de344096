"""Sparse direct solution of the assembled systems."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SolverError(RuntimeError):
    """The solve failed to reach the requested residual."""

    def __init__(self, message, residual=np.inf):
        super().__init__(message)
        self.residual = residual


@dataclass
class SolveReport:
    solution: np.ndarray
    residual: float
    iterations: int
    note: str = ""


def _relres(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return r / nb if nb > 0 else r


def solve(system, tol=1e-10, max_work=3):
    """Solve ``system.matrix @ x = system.rhs`` by sparse LU.

    Up to ``max_work`` steps of iterative refinement are applied when the
    first LU solve misses ``tol``.  Accepts a :class:`SparseSystem` or a
    ``(matrix, rhs)`` pair.

    Raises
    ------
    SolverError
        On a singular factorisation or if the relative residual is still
        above ``tol``; ``err.residual`` holds the best residual reached.
    """
    if hasattr(system, "matrix"):
        A, b = system.matrix, system.rhs
    else:
        A, b = system
    A = sp.csc_matrix(A)
    b = np.asarray(b, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError("matrix must be square and match the right-hand side")
    if A.shape[0] == 0:
        return SolveReport(np.zeros(0), 0.0, 0, "empty system")
    if not np.any(b):
        return SolveReport(np.zeros_like(b), 0.0, 0, "zero right-hand side")
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
    except RuntimeError as err:
        raise SolverError("sparse LU failed: %s" % err) from err
    x = lu.solve(b)
    res = _relres(A, x, b)
    steps = 0
    while not res <= tol and steps < max_work:
        x = x + lu.solve(b - A @ x)
        res = _relres(A, x, b)
        steps += 1
    if not np.isfinite(res) or res > tol:
        raise SolverError("relative residual %.3e above tolerance %.1e" % (res, tol), res)
    return SolveReport(x, float(res), steps, "SuperLU (COLAMD), %d refinement steps" % steps)
