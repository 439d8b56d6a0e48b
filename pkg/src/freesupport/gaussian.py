"""Gaussian helpers: sampling, moments, Bures-Wasserstein geometry."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

log = logging.getLogger(__name__)

EIG_FLOOR = 1e-14
SYM_TOL = 1e-12


class GaussianError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianParams:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float)).copy()
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float)).copy()
        d = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (d, d):
            raise GaussianError(f"mean {mean.shape} and covariance {cov.shape} do not match")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > SYM_TOL * scale:
            raise GaussianError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if not np.all(np.isfinite(cov)) or np.linalg.eigvalsh(cov).min() <= 0:
            raise GaussianError("covariance is not positive definite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Symmetric square root through eigh, eigenvalues clamped at 1e-14."""
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    root = (vecs * np.sqrt(np.maximum(vals, EIG_FLOOR))) @ vecs.T
    return 0.5 * (root + root.T)


def inv_sqrtm_psd(a: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    root = (vecs / np.sqrt(np.maximum(vals, EIG_FLOOR))) @ vecs.T
    return 0.5 * (root + root.T)


def sample(params: GaussianParams, count: int, seed=None) -> np.ndarray:
    """``count`` draws as rows: mean + L z with L the Cholesky factor."""
    rng = as_generator(seed)
    chol = np.linalg.cholesky(params.covariance)
    z = rng.standard_normal((count, params.dim))
    return params.mean + z @ chol.T


def mle(points, weights=None) -> GaussianParams:
    """Weighted mean and biased (divide-by-total-weight) covariance.

    A singular estimate gets ``1e-10 * trace / d`` added to its diagonal
    (or ``1e-10`` when the trace is zero) and a warning is logged.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    if weights is None:
        if n < 2:
            raise GaussianError("need at least two points to estimate a covariance")
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
    mean = w @ x
    centered = x - mean
    cov = (centered * w[:, None]).T @ centered
    cov = 0.5 * (cov + cov.T)
    if np.linalg.eigvalsh(cov).min() <= 0:
        tr = float(np.trace(cov))
        jitter = 1e-10 * tr / d if tr > 0 else 1e-10
        log.warning("singular covariance estimate; adding jitter %.3g", jitter)
        cov = cov + jitter * np.eye(d)
    return GaussianParams(mean, cov)


def bures_distance(a: GaussianParams, b: GaussianParams) -> float:
    """W2 between two Gaussians (means and covariances both contribute)."""
    if a.dim != b.dim:
        raise GaussianError(f"dimension mismatch: {a.dim} vs {b.dim}")
    ra = sqrtm_psd(a.covariance)
    cross = sqrtm_psd(ra @ b.covariance @ ra)
    cov_term = np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(cross)
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    return float(np.sqrt(max(mean_term + cov_term, 0.0)))


def bures_covariance_distance(cov_a, cov_b) -> float:
    d = np.shape(cov_a)[0]
    return bures_distance(GaussianParams(np.zeros(d), cov_a), GaussianParams(np.zeros(d), cov_b))


def _barycenter_map(cov, covariances, pi):
    root = sqrtm_psd(cov)
    inner = sum(p * sqrtm_psd(root @ c @ root) for p, c in zip(pi, covariances))
    iroot = inv_sqrtm_psd(cov)
    nxt = iroot @ inner @ inner @ iroot
    return 0.5 * (nxt + nxt.T)


def fixed_point_residual(cov, covariances, pi) -> float:
    return float(np.linalg.norm(_barycenter_map(cov, covariances, pi) - cov))


def gaussian_barycenter(family, pi=None, tol: float = 1e-10, max_iter: int = 500) -> GaussianParams:
    """Bures-Wasserstein barycenter by fixed-point iteration.

    Mean is the ``pi``-average of the means. The covariance iterates
    ``S <- S^{-1/2} (sum_n pi_n (S^{1/2} C_n S^{1/2})^{1/2})^2 S^{-1/2}``
    from ``S = sum_n pi_n C_n`` until the Frobenius change is below ``tol``.
    """
    family = list(family)
    if not family:
        raise GaussianError("empty family")
    n = len(family)
    pi = np.full(n, 1.0 / n) if pi is None else np.asarray(pi, dtype=float)
    if pi.shape != (n,) or np.any(pi <= 0):
        raise GaussianError("pi must be a positive vector matching the family")
    pi = pi / pi.sum()
    if len({g.dim for g in family}) != 1:
        raise GaussianError("family members disagree on dimension")
    covs = [g.covariance for g in family]
    mean = sum(p * g.mean for p, g in zip(pi, family))
    cov = sum(p * c for p, c in zip(pi, covs))
    for _ in range(max_iter):
        nxt = _barycenter_map(cov, covs, pi)
        change = np.linalg.norm(nxt - cov)
        cov = nxt
        if change < tol:
            return GaussianParams(mean, cov)
    raise ConvergenceError(f"fixed-point iteration did not converge in {max_iter} steps")


def wishart_bartlett(df: int, scale: np.ndarray, seed=None) -> np.ndarray:
    """One Wishart(df, scale) draw through the Bartlett decomposition."""
    rng = as_generator(seed)
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    d = scale.shape[0]
    if df <= d - 1:
        raise GaussianError(f"Wishart needs df > d - 1, got df={df}, d={d}")
    lower = np.zeros((d, d))
    for i in range(d):
        lower[i, i] = np.sqrt(rng.chisquare(df - i))
        lower[i, :i] = rng.standard_normal(i)
    chol = np.linalg.cholesky(scale)
    factor = chol @ lower
    out = factor @ factor.T
    return 0.5 * (out + out.T)


def benchmark_components(seed=None, count: int = 4, df: int = 4) -> list[GaussianParams]:
    """Four planar Gaussians placed around the origin with Wishart covariances.

    Component i (1-based) has mean drawn from
    ``N(10 ((-1)^floor((i-1)/2), (-1)^(i-1)), I)`` and covariance from
    ``Wishart(df, I)``.
    """
    rng = as_generator(seed)
    out = []
    for i in range(1, count + 1):
        center = 10.0 * np.array([(-1.0) ** ((i - 1) // 2), (-1.0) ** (i - 1)])
        mean = center + rng.standard_normal(2)
        cov = wishart_bartlett(df, np.eye(2), rng)
        out.append(GaussianParams(mean, cov))
    return out
