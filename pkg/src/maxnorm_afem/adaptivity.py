"""Modified maximum marking and the solve -> estimate -> mark -> refine loop."""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import StabilizationKind, assemble
from .estimator import EstimatorConfig, indicator_report
from .linsolve import SolverError, solve
from .mesh import bisect, structured_unit_square
from .problems import get_problem
from .seminorms import bubble_scales, seminorm_report

log = logging.getLogger(__name__)


class MarkingError(ValueError):
    """All indicators vanish; there is nothing to mark."""


def mark_counts(eta, k_max):
    """Bisection count per element from the ladder of powers of two.

    An element with ``2^-(j+1) eta_max <= eta(T) < 2^-j eta_max`` gets
    ``k_max - j`` bisections (``j = 0 .. k_max-1``); the maximiser gets
    ``k_max`` and anything below ``2^-k_max eta_max`` is left alone.
    """
    eta = np.asarray(eta, dtype=float)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    top = eta.max() if eta.size else 0.0
    if not top > 0:
        raise MarkingError("all indicators are zero")
    # ldexp keeps the bracket boundaries exact powers of two
    counts = np.zeros(eta.shape, dtype=np.int64)
    for j in range(k_max):
        counts[(counts == 0) & (eta >= np.ldexp(top, -(j + 1)))] = k_max - j
    return counts


def mark(report, k_max):
    """MarkList ``{element: count}`` for an :class:`IndicatorReport` (or raw array)."""
    eta = report.eta if hasattr(report, "eta") else report
    counts = mark_counts(eta, k_max)
    idx = np.flatnonzero(counts)
    return dict(zip(idx.tolist(), counts[idx].tolist()))


@dataclass(frozen=True)
class AdaptConfig:
    problem: str = "u1"
    eps: float = 1.0
    refine_mode: str = "adaptive"
    k_max: int = 4
    max_dof: int = 10_000
    n0: int = 4
    stab: StabilizationKind = field(default_factory=StabilizationKind.none)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    lin_tol: float = 1e-10
    eta_stop: float = 0.0
    max_steps: int = 100
    bubble: str = "unit"

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.refine_mode not in ("uniform", "adaptive"):
            raise ValueError("refine_mode must be 'uniform' or 'adaptive'")
        bubble_scales(self.bubble)


@dataclass
class AdaptRecord:
    step: int
    dof: int
    err_max: float
    star: float
    starstar: float
    eta_max: float
    osc: float
    ell_h: float
    seconds: float
    proj_term: float = float("nan")
    osc_term: float = float("nan")
    n_triangles: int = 0

    CSV_COLUMNS = ("step", "dof", "err_max", "star", "starstar", "eta_max", "osc", "ell_h", "seconds")

    def csv_row(self):
        return [self.step, self.dof] + ["%.12e" % getattr(self, c) for c in self.CSV_COLUMNS[2:-1]] \
            + ["%.3f" % self.seconds]


@dataclass
class AdaptResult:
    records: list
    mesh: object = None
    field: object = None
    report: object = None
    error: Exception = None


def solve_and_estimate(mesh, problem, config):
    """One solve + estimate on ``mesh``; returns ``(u_h, report, seminorms)``."""
    system = assemble(mesh, problem, config.stab)
    sol = solve(system, tol=config.lin_tol)
    u_h = system.to_field(mesh, sol.solution)
    report = indicator_report(mesh, u_h, problem, config.estimator)
    sem = None
    if problem.has_exact:
        sem = seminorm_report(mesh, u_h, problem, report.alpha,
                              config.estimator.sample_order, config.bubble)
    return u_h, report, sem


def adapt_loop(config, on_step=None, mesh=None):
    """Run the refinement loop until the DOF count reaches ``config.max_dof``.

    ``on_step(record, mesh, u_h, report)`` is called after every step, which
    lets callers stream records out as they are produced.  On a solver
    failure the records gathered so far are returned with ``error`` set.
    """
    problem = get_problem(config.problem, config.eps)
    mesh = mesh if mesh is not None else structured_unit_square(config.n0)
    records = []
    u_h = report = None
    for step in range(config.max_steps):
        t0 = time.perf_counter()
        try:
            u_h, report, sem = solve_and_estimate(mesh, problem, config)
        except SolverError as err:
            log.error("step %d: %s", step, err)
            return AdaptResult(records, mesh, u_h, report, err)
        dof = len(mesh.interior_vertices)
        nan = float("nan")
        rec = AdaptRecord(
            step=step, dof=dof,
            err_max=sem.err_max if sem else nan,
            star=sem.star if sem else nan,
            starstar=sem.starstar if sem else nan,
            eta_max=report.eta_max, osc=report.osc_max, ell_h=report.ell_h,
            seconds=time.perf_counter() - t0,
            proj_term=sem.proj_term if sem else nan,
            osc_term=sem.osc_term if sem else nan,
            n_triangles=mesh.n_triangles,
        )
        records.append(rec)
        log.info("step %d dof %d eta %.3e err %.3e", step, dof, rec.eta_max, rec.err_max)
        if on_step is not None:
            on_step(rec, mesh, u_h, report)
        if dof >= config.max_dof or (config.eta_stop > 0 and rec.eta_max <= config.eta_stop):
            break
        if config.refine_mode == "uniform":
            # two bisection levels = one red refinement on structured meshes
            counts = np.full(mesh.n_triangles, 2)
        else:
            counts = mark_counts(report.eta, config.k_max)
        mesh = bisect(mesh, counts)
    return AdaptResult(records, mesh, u_h, report)
