"""Experiment pipelines behind the CLI subcommands.

Each runner takes a master seed and derives every random stream from it by
fixed counters, so results do not depend on execution order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor

import numpy as np

from .barycenter import SolverOptions, solve
from .bayes_linreg import generate_data, oracle_posterior, subset_posteriors, wasp
from .gaussian import benchmark_components, bures_covariance_distance, gaussian_barycenter, mle, sample
from .imaging import image_to_measure
from .kmeans import kmeans, summary_size
from .measures import make_family, make_measure
from .metrics import (ari, calinski_harabasz, classification_report, classify_nearest_prototype,
                      nmi, semidiscrete_w2, silhouette)
from .ot_exact import squared_distances
from .rng import stream

log = logging.getLogger(__name__)


def _map(executor, fn, items):
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def _solver_opts(base: SolverOptions | None, **overrides) -> SolverOptions:
    fields = {} if base is None else dict(base.__dict__)
    fields.update(overrides)
    return SolverOptions(**fields)


def moment_errors(measure, oracle) -> tuple[float, float]:
    """Euclidean mean error and Bures covariance error of a measure's MLE."""
    est = mle(measure.support, measure.weights)
    mean_err = float(np.linalg.norm(est.mean - oracle.mean))
    return mean_err, bures_covariance_distance(est.covariance, oracle.covariance)


def gauss_bench_repetition(rep: int, atom_grid, seed: int = 0, sample_size: int = 100,
                           mc_sample: int = 100, mc_repeats: int = 100,
                           opts: SolverOptions | None = None) -> list[dict]:
    components = benchmark_components(stream(seed, rep, 0))
    oracle = gaussian_barycenter(components)
    family = make_family([make_measure(sample(g, sample_size, stream(seed, rep, 1, i)))
                          for i, g in enumerate(components)])
    rows = []
    for m in atom_grid:
        state = solve(family, _solver_opts(opts, support_size=int(m), rng_seed=seed + rep))
        bary = state.measure
        w2_mc, w2_se = semidiscrete_w2(oracle, bary, mc_sample, mc_repeats, seed=seed * 1000003 + rep)
        mean_err, cov_err = moment_errors(bary, oracle)
        rows.append({
            "rep": rep,
            "n_atoms": int(m),
            "w2_mc": w2_mc,
            "w2_mc_se": w2_se,
            "mean_err": mean_err,
            "bures_cov_err": cov_err,
            "iterations": state.iteration,
        })
        log.info("gauss-bench rep=%d m=%d w2=%.4f iters=%d", rep, m, w2_mc, state.iteration)
    return rows


def run_gauss_bench(repeats: int = 100, atom_grid=tuple(range(10, 201, 10)), seed: int = 0,
                    sample_size: int = 100, mc_sample: int = 100, mc_repeats: int = 100,
                    opts: SolverOptions | None = None, executor: Executor | None = None) -> list[dict]:
    def one(rep):
        return gauss_bench_repetition(rep, atom_grid, seed, sample_size, mc_sample, mc_repeats, opts)

    return [row for rows in _map(executor, one, range(repeats)) for row in rows]


def wasp_repetition(rep: int, n: int, K_list, m_list, seed: int = 0, draws_per_subset: int = 200,
                    mc_sample: int = 100, mc_repeats: int = 100,
                    opts: SolverOptions | None = None) -> list[dict]:
    data = generate_data(n, seed=stream(seed, rep, 0))
    oracle = oracle_posterior(data)
    rows = []
    for K in K_list:
        posts = subset_posteriors(data, int(K), seed=stream(seed, rep, 1, K))
        raw = make_measure(sample(posts[0], draws_per_subset, stream(seed, rep, 2, K)))
        raw_mean_err, raw_cov_err = moment_errors(raw, oracle)
        rows.append({"kind": "raw_subset", "rep": rep, "K": int(K), "m": None, "seed": seed,
                     "w2_to_oracle": None, "mean_err": raw_mean_err, "cov_err": raw_cov_err})
        for m in m_list:
            wseed = int(np.random.SeedSequence([seed, rep, 3, K, m]).generate_state(1)[0])
            bary = wasp(posts, draws_per_subset, int(m), seed=wseed,
                        opts=_solver_opts(opts, support_size=int(m), rng_seed=wseed))
            w2, _ = semidiscrete_w2(oracle, bary, mc_sample, mc_repeats, seed=wseed)
            mean_err, cov_err = moment_errors(bary, oracle)
            rows.append({"kind": "wasp", "rep": rep, "K": int(K), "m": int(m), "seed": seed,
                         "w2_to_oracle": w2, "mean_err": mean_err, "cov_err": cov_err})
            log.info("wasp rep=%d K=%d m=%d w2=%.5f cov=%.5f", rep, K, m, w2, cov_err)
    return rows


def run_wasp(n: int = 2000, K_list=(2, 5, 10), m_list=(10, 25, 50, 100, 200), repeats: int = 10,
             seed: int = 0, draws_per_subset: int = 200, mc_sample: int = 100, mc_repeats: int = 100,
             opts: SolverOptions | None = None, executor: Executor | None = None) -> list[dict]:
    def one(rep):
        return wasp_repetition(rep, n, K_list, m_list, seed, draws_per_subset,
                               mc_sample, mc_repeats, opts)

    return [row for rows in _map(executor, one, range(repeats)) for row in rows]


def class_barycenters(train, m: int, seed: int = 0, opts: SolverOptions | None = None) -> dict:
    """One free-support barycenter per label; ``train`` is (measure, label) pairs."""
    by_label: dict = {}
    for mu, label in train:
        by_label.setdefault(label, []).append(mu)
    protos = {}
    for label in sorted(by_label):
        family = make_family(by_label[label])
        pooled_atoms = sum(mu.size for mu in by_label[label])
        if pooled_atoms < 1:
            raise ValueError(f"class {label!r} has no atoms")
        protos[label] = solve(family, _solver_opts(opts, support_size=min(int(m), pooled_atoms),
                                                   rng_seed=seed)).measure
    return protos


def run_classify(train_images, test_images, m_list=(10, 20, 40, 80), seed: int = 0,
                 opts: SolverOptions | None = None) -> list[dict]:
    """Nearest-barycenter classification; images are (GrayImage, label) pairs."""
    train = [(image_to_measure(img), label) for img, label in train_images]
    test = [image_to_measure(img) for img, _ in test_images]
    truth = [label for _, label in test_images]
    if not train:
        raise ValueError("empty training set")
    rows = []
    for m in m_list:
        protos = class_barycenters(train, int(m), seed, opts)
        pred = classify_nearest_prototype(test, protos)
        report = classification_report(pred, truth)
        rows.append({"m": int(m), **report})
        log.info("classify m=%d accuracy=%.4f", m, report["accuracy"])
    return rows


def nearest_center(points, centers) -> np.ndarray:
    return np.argmin(squared_distances(points, centers), axis=1)


def dvq_centroids(points, k: int, S: int, seed: int = 0, fraction: float = 0.1,
                  opts: SolverOptions | None = None) -> np.ndarray:
    """Split into S parts, compress each by k-means, take the barycenter of the summaries."""
    x = np.asarray(points, dtype=float)
    parts = np.array_split(stream(seed, S, 0).permutation(x.shape[0]), S)
    summaries = []
    for s, idx in enumerate(parts):
        block = x[idx]
        res = kmeans(block, k=summary_size(block.shape[0], fraction), seed=stream(seed, S, 1, s))
        counts = np.bincount(res.assignments, minlength=res.centers.shape[0])
        keep = counts > 0
        summaries.append(make_measure(res.centers[keep], counts[keep] / counts.sum()))
    total = sum(mu.size for mu in summaries)
    if k > total:
        raise ValueError(f"k={k} exceeds the {total} summary atoms")
    state = solve(make_family(summaries), _solver_opts(opts, support_size=int(k), rng_seed=seed))
    return state.support


def _cluster_scores(points, labels, truth) -> dict:
    out = {}
    if truth is not None:
        out["ari"] = ari(truth, labels)
        out["nmi"] = nmi(truth, labels)
    try:
        out["silhouette"] = silhouette(points, labels)
    except ValueError:
        out["silhouette"] = math.nan
    try:
        out["ch"] = calinski_harabasz(points, labels)
    except ValueError:
        out["ch"] = math.nan
    return out


def run_dvq(points, truth=None, k_list=(3,), S_list=(2, 5), seed: int = 0, fraction: float = 0.1,
            opts: SolverOptions | None = None) -> list[dict]:
    x = np.asarray(points, dtype=float)
    rows = []
    for k in k_list:
        base = kmeans(x, k=int(k), seed=stream(seed, 0, k))
        rows.append({"method": "kmeans", "k": int(k), "S": None,
                     **_cluster_scores(x, base.assignments, truth)})
        for S in S_list:
            centers = dvq_centroids(x, int(k), int(S), seed, fraction, opts)
            labels = nearest_center(x, centers)
            rows.append({"method": "dvq", "k": int(k), "S": int(S),
                         **_cluster_scores(x, labels, truth)})
            log.info("dvq k=%d S=%d %s", k, S, rows[-1])
    return rows


def gaussian_blobs(n: int = 3000, d: int = 10, centers: int = 3, spread: float = 10.0,
                   seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Well separated isotropic blobs with unit variance; returns points and labels."""
    rng = stream(seed, 99)
    locs = rng.normal(scale=spread, size=(centers, d))
    labels = rng.integers(centers, size=n)
    return locs[labels] + rng.standard_normal((n, d)), labels
