"""Adaptive P1 finite elements for convection-diffusion with maximum-norm
residual estimators, convective error seminorms and newest-vertex bisection."""
from .adaptivity import AdaptConfig, AdaptRecord, AdaptResult, adapt_loop, mark, mark_counts
from .assembly import DiscreteField, Stabilization, StabilizationKind, assemble
from .estimator import EstimatorConfig, IndicatorReport, indicator_report
from .linsolve import SolverError, solve
from .mesh import Mesh, MeshError, bisect, structured_unit_square, uniform_refine
from .problems import Problem, get_problem
from .seminorms import SeminormReport, seminorm_report

__version__ = "0.1.0"

__all__ = [
    "AdaptConfig", "AdaptRecord", "AdaptResult", "adapt_loop", "mark", "mark_counts",
    "DiscreteField", "Stabilization", "StabilizationKind", "assemble",
    "EstimatorConfig", "IndicatorReport", "indicator_report",
    "SolverError", "solve",
    "Mesh", "MeshError", "bisect", "structured_unit_square", "uniform_refine",
    "Problem", "get_problem", "SeminormReport", "seminorm_report",
]
