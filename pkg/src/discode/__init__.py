"""discode: numerics for f'' + A f = 0 in the unit disc.

Expression trees with exact derivatives, a stepped Taylor solver, estimators
for the growth/oscillation norms of analytic functions, coefficient-condition
checkers, zero counting via the argument principle, and the converse-problem
identities for normalized solution pairs.
"""

from ._kernels import backend_name
from .expr import AnalyticExpr, EvaluationError, mobius, parse
from .gallery import GalleryEntry, get as gallery_get
from .grids import DiscGrid, max_modulus
from .series import TaylorPatch, taylor_at
from .solver import (
    ODEProblem,
    RaySolution,
    continue_along_ray,
    gronwall_bound,
    reduction_of_order,
    residual,
    taylor_solve,
    wronskian,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticExpr",
    "DiscGrid",
    "EvaluationError",
    "GalleryEntry",
    "ODEProblem",
    "RaySolution",
    "TaylorPatch",
    "backend_name",
    "continue_along_ray",
    "gallery_get",
    "gronwall_bound",
    "max_modulus",
    "mobius",
    "parse",
    "reduction_of_order",
    "residual",
    "taylor_at",
    "taylor_solve",
    "wronskian",
    "__version__",
]
