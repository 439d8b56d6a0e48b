"""Free-support Wasserstein barycenters by particle flow."""

from .barycenter import BarycenterState, SolverOptions, initialize, objective, solve, step
from .measures import DiscreteMeasure, WeightedFamily, make_family, make_measure, pool_supports
from .ot_exact import TransportPlan, solve_ot, w2_distance

__all__ = [
    "BarycenterState",
    "DiscreteMeasure",
    "SolverOptions",
    "TransportPlan",
    "WeightedFamily",
    "initialize",
    "make_family",
    "make_measure",
    "objective",
    "pool_supports",
    "solve",
    "solve_ot",
    "step",
    "w2_distance",
]
