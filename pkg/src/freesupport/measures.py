"""Discrete measures and weighted families of them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

WEIGHT_INPUT_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-12


class MeasureError(ValueError):
    """Raised when a measure or family fails validation."""


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise MeasureError(f"points must be a 2-d array, got shape {pts.shape}")
    if pts.shape[0] < 1 or pts.shape[1] < 1:
        raise MeasureError(f"need at least one atom and one coordinate, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise MeasureError("support contains NaN or Inf coordinates")
    return pts


def _as_simplex(weights, size: int, what: str = "weights") -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape[0] != size:
        raise MeasureError(f"{what}: expected {size} entries, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise MeasureError(f"{what} contain NaN or Inf")
    if np.any(w <= 0):
        raise MeasureError(f"{what} must be strictly positive")
    total = w.sum()
    if abs(total - 1.0) > WEIGHT_INPUT_TOL:
        raise MeasureError(f"{what} sum to {total!r}, off by more than {WEIGHT_INPUT_TOL}")
    return w / total


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud ``sum_j w_j delta(x_j)`` in R^d.

    Instances are validated on construction and the arrays are made
    read-only, so measures can be shared freely.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.support)
        w = _as_simplex(self.weights, pts.shape[0])
        pts = pts.copy()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.support

    def translate(self, shift) -> "DiscreteMeasure":
        return DiscreteMeasure(self.support + np.asarray(shift, dtype=float), self.weights)


def make_measure(points, weights=None) -> DiscreteMeasure:
    """Build a validated measure; ``weights=None`` means uniform.

    Weights whose sum is within 1e-9 of one are renormalised silently,
    anything further off is rejected. Duplicate atoms are kept as is.
    """
    pts = _as_points(points)
    if weights is None:
        weights = np.full(pts.shape[0], 1.0 / pts.shape[0])
    return DiscreteMeasure(pts, weights)


@dataclass(frozen=True)
class WeightedFamily:
    """N measures of a common dimension with mixing weights ``pi``."""

    measures: tuple
    family_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        ms = tuple(self.measures)
        if not ms:
            raise MeasureError("family must contain at least one measure")
        for mu in ms:
            if not isinstance(mu, DiscreteMeasure):
                raise MeasureError("family members must be DiscreteMeasure instances")
        dims = {mu.dim for mu in ms}
        if len(dims) != 1:
            raise MeasureError(f"family members disagree on dimension: {sorted(dims)}")
        pi = self.family_weights
        if pi is None:
            pi = np.full(len(ms), 1.0 / len(ms))
        pi = _as_simplex(pi, len(ms), what="family weights")
        pi.setflags(write=False)
        object.__setattr__(self, "measures", ms)
        object.__setattr__(self, "family_weights", pi)

    def __len__(self) -> int:
        return len(self.measures)

    def __iter__(self):
        return iter(zip(self.family_weights, self.measures))

    @property
    def dim(self) -> int:
        return self.measures[0].dim


def make_family(measures: Sequence[DiscreteMeasure], weights=None) -> WeightedFamily:
    return WeightedFamily(tuple(measures), weights)


def pool_supports(family: WeightedFamily) -> DiscreteMeasure:
    """Concatenate all supports; atom j of measure n carries ``pi_n * w_nj``."""
    points = np.concatenate([mu.support for mu in family.measures], axis=0)
    weights = np.concatenate([p * mu.weights for p, mu in family])
    return DiscreteMeasure(points, weights / weights.sum())
