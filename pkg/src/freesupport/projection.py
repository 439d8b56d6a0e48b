"""Barycentric projections of optimal plans and the induced descent direction."""

from __future__ import annotations

from concurrent.futures import Executor

import numpy as np

from .measures import DiscreteMeasure, MeasureError, WeightedFamily
from .ot_exact import TransportPlan, solve_ot


def barycentric_projection(plan: TransportPlan, target: DiscreteMeasure) -> np.ndarray:
    """Row i is the plan-conditional mean ``(1/v_i) sum_j G_ij x_j`` of the target."""
    gamma = plan.matrix
    if gamma.shape[1] != target.size:
        raise MeasureError(f"plan has {gamma.shape[1]} columns, target has {target.size} atoms")
    v = np.asarray(plan.source_weights, dtype=float)
    if np.any(v <= 0):
        raise MeasureError("barycentric projection needs strictly positive source weights")
    return (gamma @ target.support) / v[:, None]


def approx_log(current: DiscreteMeasure, target: DiscreteMeasure) -> np.ndarray:
    """Displacement ``T(z_i) - z_i`` of every atom of ``current`` toward ``target``."""
    plan = solve_ot(current, target)
    return barycentric_projection(plan, target) - current.support


def family_projections(current: DiscreteMeasure, family: WeightedFamily,
                       executor: Executor | None = None) -> list[tuple[TransportPlan, np.ndarray]]:
    """Plans and projections of ``current`` onto every family member, in family order."""
    if current.dim != family.dim:
        raise MeasureError(f"dimension mismatch: {current.dim} vs {family.dim}")

    def one(target):
        plan = solve_ot(current, target)
        return plan, barycentric_projection(plan, target)

    if executor is None:
        return [one(mu) for mu in family.measures]
    return list(executor.map(one, family.measures))


def averaged_projection(projections, family_weights) -> np.ndarray:
    """``sum_n pi_n T_n``, summed in family order."""
    total = np.zeros_like(projections[0])
    for p, proj in zip(family_weights, projections):
        total += p * proj
    return total


def approx_gradient(current: DiscreteMeasure, family: WeightedFamily,
                    executor: Executor | None = None) -> np.ndarray:
    """Descent field ``-2 sum_n pi_n (T_n(z_i) - z_i)``, one row per atom."""
    projs = [proj for _, proj in family_projections(current, family, executor)]
    return -2.0 * (averaged_projection(projs, family.family_weights) - current.support)


def frozen_plan_objective(support: np.ndarray, plans, family: WeightedFamily) -> float:
    """``sum_n pi_n sum_ij G_ij |z_i - x_j|^2`` with the plans held fixed."""
    total = 0.0
    for p, plan, mu in zip(family.family_weights, plans, family.measures):
        diff = support[:, None, :] - mu.support[None, :, :]
        total += p * float(np.sum(plan.matrix * np.einsum("ijk,ijk->ij", diff, diff)))
    return total


def frozen_plan_gradient(support: np.ndarray, plans, family: WeightedFamily) -> np.ndarray:
    """Exact gradient of :func:`frozen_plan_objective` in the atom locations.

    Equals ``2 sum_n pi_n v_i (z_i - T_n(z_i))``, i.e. the descent field
    scaled row-wise by the atom weights.
    """
    grad = np.zeros_like(support, dtype=float)
    for p, plan, mu in zip(family.family_weights, plans, family.measures):
        v = plan.source_weights
        proj = (plan.matrix @ mu.support) / v[:, None]
        grad += 2.0 * p * v[:, None] * (support - proj)
    return grad
