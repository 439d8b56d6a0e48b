"""Evaluation: Monte Carlo W2, clustering indices, classification scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .barycenter import objective
from .gaussian import GaussianParams, sample
from .measures import DiscreteMeasure, MeasureError, WeightedFamily, make_measure
from .ot_exact import squared_distances, w2_distance
from .rng import stream


def semidiscrete_w2(oracle: GaussianParams, measure: DiscreteMeasure, sample_size: int = 100,
                    repeats: int = 100, seed: int = 0) -> tuple[float, float]:
    """Mean and standard error of exact W2 between fresh oracle samples and ``measure``.

    Repeat r draws from its own stream ``(seed, r)``.
    """
    if oracle.dim != measure.dim:
        raise MeasureError(f"dimension mismatch: {oracle.dim} vs {measure.dim}")
    dists = np.array([
        w2_distance(make_measure(sample(oracle, sample_size, stream(seed, r))), measure)
        for r in range(repeats)
    ])
    stderr = dists.std(ddof=1) / np.sqrt(repeats) if repeats > 1 else 0.0
    return float(dists.mean()), float(stderr)


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    rows: np.ndarray
    cols: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def contingency(labels_a, labels_b) -> ContingencyTable:
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"label vectors differ in shape: {a.shape} vs {b.shape}")
    rows, ia = np.unique(a, return_inverse=True)
    cols, ib = np.unique(b, return_inverse=True)
    counts = np.zeros((rows.size, cols.size), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return ContingencyTable(counts, rows, cols)


def ari(labels_a, labels_b) -> float:
    """Adjusted Rand index under the permutation model."""
    table = contingency(labels_a, labels_b).counts
    n = table.sum()
    sum_cells = comb(table, 2).sum()
    sum_rows = comb(table.sum(axis=1), 2).sum()
    sum_cols = comb(table.sum(axis=0), 2).sum()
    expected = sum_rows * sum_cols / comb(n, 2) if n > 1 else 0.0
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        # both partitions trivial in the same way
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(labels_a, labels_b) -> float:
    """Mutual information over the arithmetic mean of the two entropies (nats)."""
    table = contingency(labels_a, labels_b).counts.astype(float)
    n = table.sum()
    ha = _entropy(table.sum(axis=1))
    hb = _entropy(table.sum(axis=0))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    pa = table.sum(axis=1, keepdims=True) / n
    pb = table.sum(axis=0, keepdims=True) / n
    pab = table / n
    nz = pab > 0
    mi = float((pab[nz] * np.log(pab[nz] / (pa @ pb)[nz])).sum())
    return float(max(mi, 0.0) / (0.5 * (ha + hb)))


def silhouette(points, labels) -> float:
    """Average silhouette with Euclidean distances; singleton clusters score 0."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    lab = np.asarray(labels)
    ids, inv = np.unique(lab, return_inverse=True)
    if ids.size < 2:
        raise ValueError("silhouette needs at least two clusters")
    dist = np.sqrt(squared_distances(x, x))
    sizes = np.bincount(inv)
    # sum of distances from every point to every cluster
    sums = np.zeros((x.shape[0], ids.size))
    for c in range(ids.size):
        sums[:, c] = dist[:, inv == c].sum(axis=1)
    own = sizes[inv]
    a = np.where(own > 1, sums[np.arange(len(inv)), inv] / np.maximum(own - 1, 1), 0.0)
    means = sums / sizes
    means[np.arange(len(inv)), inv] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


def calinski_harabasz(points, labels) -> float:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    lab = np.asarray(labels)
    ids, inv = np.unique(lab, return_inverse=True)
    n, k = x.shape[0], ids.size
    if k < 2 or k >= n:
        raise ValueError(f"Calinski-Harabasz is undefined for k={k} clusters on n={n} points")
    center = x.mean(axis=0)
    between = 0.0
    within = 0.0
    for c in range(k):
        block = x[inv == c]
        mean = block.mean(axis=0)
        between += block.shape[0] * float(np.sum((mean - center) ** 2))
        within += float(np.sum((block - mean) ** 2))
    if within == 0.0:
        return float("inf")
    return float(between * (n - k) / (within * (k - 1)))


def classify_nearest_prototype(test, prototypes: dict) -> list:
    """Label of the W2-closest prototype; ties go to the smallest label."""
    labels = sorted(prototypes)
    out = []
    for mu in test:
        dists = [w2_distance(mu, prototypes[lab]) for lab in labels]
        out.append(labels[int(np.argmin(dists))])
    return out


def classification_report(predicted, truth) -> dict:
    """Accuracy plus macro-averaged precision, recall and F1."""
    pred = np.asarray(predicted)
    true = np.asarray(truth)
    if pred.size == 0:
        raise ValueError("empty prediction vector")
    if pred.shape != true.shape:
        raise ValueError("predicted and truth differ in length")
    classes = np.unique(np.concatenate([true, pred]))
    precision, recall, f1 = [], [], []
    for c in classes:
        tp = np.sum((pred == c) & (true == c))
        n_pred = np.sum(pred == c)
        n_true = np.sum(true == c)
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_true if n_true else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r > 0 else 0.0)
    return {
        "accuracy": float(np.mean(pred == true)),
        "precision": float(np.mean(precision)),
        "recall": float(np.mean(recall)),
        "f1": float(np.mean(f1)),
    }


def stability_gap(family_a: WeightedFamily, family_b: WeightedFamily,
                  candidate: DiscreteMeasure) -> dict:
    """Objective difference between two families against ``4 R delta``.

    ``R`` is the radius of the smallest origin-centred ball holding every
    support involved; ``delta`` is the largest member-wise W2 distance.
    """
    if len(family_a) != len(family_b):
        raise MeasureError(f"family sizes differ: {len(family_a)} vs {len(family_b)}")
    if not np.allclose(family_a.family_weights, family_b.family_weights, rtol=0, atol=1e-12):
        raise MeasureError("families must share their mixing weights")
    gap = abs(objective(candidate, family_a) - objective(candidate, family_b))
    clouds = [candidate.support] + [mu.support for mu in family_a.measures + family_b.measures]
    radius = max(float(np.linalg.norm(c, axis=1).max()) for c in clouds)
    delta = max(w2_distance(a, b) for a, b in zip(family_a.measures, family_b.measures))
    return {"gap": gap, "bound": 4.0 * radius * delta, "radius": radius, "delta": delta}
