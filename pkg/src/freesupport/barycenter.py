"""Free-support Wasserstein barycenter by particle flow.

Each iteration solves one exact OT problem per input measure, maps every
barycenter atom to its barycentric projections, and moves it toward their
``pi``-weighted average:

    z_i <- (1 - 2 eta) z_i + 2 eta sum_n pi_n T_n(z_i)

With ``eta = 1/2`` the atom jumps straight to the averaged projection.
Atom weights stay fixed throughout.
"""

from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .kmeans import kmeans
from .measures import DiscreteMeasure, MeasureError, WeightedFamily, pool_supports
from .ot_exact import solve_ot
from .projection import averaged_projection, family_projections

ZERO_OBJECTIVE = 1e-14
INIT_MODES = ("kmeans_pooled", "user_supplied")

# callables invoked with every finished BarycenterState (diagnostics, test audits)
observers: list = []


@dataclass(frozen=True)
class SolverOptions:
    step_size: float = 0.5
    tolerance: float = 1e-6
    max_iterations: int = 200
    support_size: int = 10
    init_mode: str = "kmeans_pooled"
    rng_seed: int = 0
    weights: Optional[np.ndarray] = None
    init_support: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.step_size <= 0.5:
            raise ValueError(f"step_size must lie in (0, 0.5], got {self.step_size}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.support_size < 1:
            raise ValueError(f"support_size must be >= 1, got {self.support_size}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if self.init_mode == "user_supplied" and self.init_support is None:
            raise ValueError("init_mode='user_supplied' needs init_support")


@dataclass(frozen=True)
class BarycenterState:
    support: np.ndarray
    weights: np.ndarray
    iteration: int = 0
    objective_trace: tuple = field(default_factory=tuple)
    converged: bool = False

    @property
    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.support, self.weights)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else math.nan


def objective(candidate: DiscreteMeasure, family: WeightedFamily) -> float:
    """``sum_n pi_n W_2^2(candidate, mu_n)``, computed with exact plans."""
    if candidate.dim != family.dim:
        raise MeasureError(f"dimension mismatch: {candidate.dim} vs {family.dim}")
    return float(sum(p * solve_ot(candidate, mu).cost for p, mu in family))


def _barycenter_weights(opts: SolverOptions, m: int) -> np.ndarray:
    if opts.weights is None:
        return np.full(m, 1.0 / m)
    return DiscreteMeasure(np.zeros((m, 1)), opts.weights).weights


def initialize(family: WeightedFamily, opts: SolverOptions) -> BarycenterState:
    """Starting iterate: k-means centers of the pooled supports, or a given matrix."""
    if len(family) == 0:
        raise MeasureError("empty family")
    if opts.init_mode == "user_supplied":
        support = np.asarray(opts.init_support, dtype=float)
        if support.ndim == 1:
            support = support[:, None]
        if support.shape[1] != family.dim:
            raise MeasureError(f"init_support has dimension {support.shape[1]}, family {family.dim}")
        m = support.shape[0]
    else:
        pooled = pool_supports(family)
        m = opts.support_size
        if m > pooled.size:
            raise MeasureError(f"support_size {m} exceeds the {pooled.size} pooled atoms")
        support = kmeans(pooled.support, pooled.weights, k=m, seed=opts.rng_seed).centers
    weights = _barycenter_weights(opts, m)
    support = DiscreteMeasure(support, weights).support
    return BarycenterState(support=support, weights=weights)


def update_support(support: np.ndarray, averaged: np.ndarray, eta: float) -> np.ndarray:
    if eta == 0.5:
        return averaged.copy()
    return (1.0 - 2.0 * eta) * support + 2.0 * eta * averaged


def _evaluate(support, weights, family, executor):
    pairs = family_projections(DiscreteMeasure(support, weights), family, executor)
    f = float(sum(p * plan.cost for p, (plan, _) in zip(family.family_weights, pairs)))
    if not math.isfinite(f):
        raise FloatingPointError(f"objective became non-finite ({f})")
    return f, [proj for _, proj in pairs]


def step(state: BarycenterState, family: WeightedFamily, eta: float = 0.5,
         executor: Executor | None = None) -> BarycenterState:
    """One particle-flow update; the new objective is appended to the trace."""
    if not 0.0 < eta <= 0.5:
        raise ValueError(f"step size must lie in (0, 0.5], got {eta}")
    f_now, projs = _evaluate(state.support, state.weights, family, executor)
    trace = state.objective_trace or (f_now,)
    new_support = update_support(state.support, averaged_projection(projs, family.family_weights), eta)
    f_new, _ = _evaluate(new_support, state.weights, family, executor)
    new = replace(state, support=new_support, iteration=state.iteration + 1,
                  objective_trace=trace + (f_new,))
    for fn in observers:
        fn(new)
    return new


def solve(family: WeightedFamily, opts: SolverOptions = SolverOptions(),
          state: BarycenterState | None = None,
          executor: Executor | None = None) -> BarycenterState:
    """Iterate until the relative objective change drops below the tolerance.

    The trace starts with the objective of the initial iterate. A run also
    stops once the objective is below 1e-14 or after ``max_iterations``.
    """
    if state is None:
        state = initialize(family, opts)
    support, weights = state.support, state.weights
    f_prev, projs = _evaluate(support, weights, family, executor)
    trace = list(state.objective_trace) or [f_prev]
    converged = f_prev < ZERO_OBJECTIVE
    it = state.iteration
    for _ in range(opts.max_iterations):
        if converged:
            break
        avg = averaged_projection(projs, family.family_weights)
        support = update_support(support, avg, opts.step_size)
        f_new, projs = _evaluate(support, weights, family, executor)
        trace.append(f_new)
        it += 1
        if f_new < ZERO_OBJECTIVE or abs(f_new - f_prev) / f_prev < opts.tolerance:
            converged = True
        f_prev = f_new
    final = BarycenterState(support=support, weights=weights, iteration=it,
                            objective_trace=tuple(trace), converged=converged)
    for fn in observers:
        fn(final)
    return final


def stationarity_residual(state: BarycenterState, family: WeightedFamily) -> float:
    """Largest ``|sum_n pi_n T_n(z_i) - z_i|`` over the atoms."""
    _, projs = _evaluate(state.support, state.weights, family, None)
    avg = averaged_projection(projs, family.family_weights)
    return float(np.linalg.norm(avg - state.support, axis=1).max())
