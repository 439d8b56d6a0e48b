"""Weighted Lloyd k-means with k-means++ seeding."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ot_exact import squared_distances
from .rng import as_generator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_trace: list = field(default_factory=list)
    n_iter: int = 0


def summary_size(n_points: int, fraction: float = 0.1) -> int:
    """Number of centroids for a ``fraction`` summary of ``n_points``."""
    return max(1, int(round(fraction * n_points)))


def kmeans_plus_plus(points: np.ndarray, weights: np.ndarray, k: int, rng) -> np.ndarray:
    """Indices of k seeds, each drawn with probability proportional to w * D^2."""
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.choice(n, p=weights)
    d2 = squared_distances(points, points[chosen[:1]])[:, 0]
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    for c in range(1, k):
        score = weights * d2
        score[taken] = 0.0
        total = score.sum()
        if total <= 0.0:
            # every remaining point coincides with a seed
            free = np.flatnonzero(~taken)
            idx = free[rng.integers(free.size)]
        else:
            idx = rng.choice(n, p=score / total)
        chosen[c] = idx
        taken[idx] = True
        d2 = np.minimum(d2, squared_distances(points, points[idx : idx + 1])[:, 0])
    return chosen


def _assign(points, centers):
    d2 = squared_distances(points, centers)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(points.shape[0]), labels]


def kmeans(points, weights=None, k: int = 1, seed=0, max_iter: int = 100) -> KMeansResult:
    """Cluster ``points`` into ``k`` groups.

    Seeding is k-means++ (weighted by ``weights * D^2``), then Lloyd steps
    until the assignment stops changing or ``max_iter`` is hit. A cluster
    that empties out is re-seeded at the point farthest from its current
    center. Results are a deterministic function of ``seed``.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be a nonnegative n-vector with positive total")
    rng = as_generator(seed)

    if k > 1 and np.unique(x, axis=0).shape[0] < k:
        log.warning("only %d distinct points for k=%d; some centers will coincide",
                    np.unique(x, axis=0).shape[0], k)

    centers = x[kmeans_plus_plus(x, w / w.sum(), k, rng)].copy()
    labels, d2 = _assign(x, centers)
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        mass = np.bincount(labels, weights=w, minlength=k)
        for c in np.flatnonzero(mass <= 0):
            # take the worst-served point from a cluster that can spare it
            counts = np.bincount(labels, minlength=k)
            donors = counts[labels] > 1
            if not donors.any():
                break
            far = np.flatnonzero(donors)[np.argmax(d2[donors])]
            labels[far] = c
            d2[far] = 0.0
        mass = np.bincount(labels, weights=w, minlength=k)
        for dim in range(x.shape[1]):
            sums = np.bincount(labels, weights=w * x[:, dim], minlength=k)
            nonempty = mass > 0
            centers[nonempty, dim] = sums[nonempty] / mass[nonempty]
        new_labels, d2 = _assign(x, centers)
        trace.append(float(w @ d2))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    return KMeansResult(
        centers=centers,
        assignments=labels,
        inertia=float(w @ d2),
        inertia_trace=trace,
        n_iter=it,
    )
