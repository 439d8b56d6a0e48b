"""Conjugate Bayesian linear regression and Wasserstein posterior aggregation.

With a Gaussian prior ``beta ~ N(m0, V0)`` and known noise variance the
posterior is Gaussian in closed form, so subset posteriors (fit under a
likelihood raised to ``alpha = n / n_k``) can be sampled exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barycenter import SolverOptions, solve
from .gaussian import GaussianParams, sample
from .measures import DiscreteMeasure, make_family, make_measure
from .rng import as_generator, stream

PosteriorParams = GaussianParams


@dataclass(frozen=True)
class RegressionData:
    X: np.ndarray
    y: np.ndarray
    true_beta: np.ndarray
    sigma2: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(-1, np.shape(self.true_beta)[0])
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "true_beta", np.asarray(self.true_beta, dtype=float))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def subset(self, idx) -> "RegressionData":
        return RegressionData(self.X[idx], self.y[idx], self.true_beta, self.sigma2)


def default_prior(p: int = 2) -> GaussianParams:
    return GaussianParams(np.zeros(p), 16.0 * np.eye(p))


def generate_data(n: int, p: int = 2, beta=None, sigma2: float = 1.0, seed=None) -> RegressionData:
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    beta = np.ones(p) if beta is None else np.asarray(beta, dtype=float)
    rng = as_generator(seed)
    X = rng.standard_normal((n, p))
    y = X @ beta + np.sqrt(sigma2) * rng.standard_normal(n)
    return RegressionData(X, y, beta, sigma2)


def subset_power_posterior(subset: RegressionData, alpha: float = 1.0,
                           prior: GaussianParams | None = None) -> PosteriorParams:
    """Posterior under the likelihood raised to ``alpha``.

    ``V = (V0^-1 + alpha/s2 X'X)^-1`` and ``m = V (V0^-1 m0 + alpha/s2 X'y)``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    prior = default_prior(subset.X.shape[1]) if prior is None else prior
    prior_prec = np.linalg.inv(prior.covariance)
    scale = alpha / subset.sigma2
    prec = prior_prec + scale * subset.X.T @ subset.X
    rhs = prior_prec @ prior.mean + scale * subset.X.T @ subset.y
    cov = np.linalg.inv(prec)
    return GaussianParams(np.linalg.solve(prec, rhs), 0.5 * (cov + cov.T))


def oracle_posterior(data: RegressionData, prior: GaussianParams | None = None) -> PosteriorParams:
    return subset_power_posterior(data, 1.0, prior)


def split_indices(n: int, K: int, seed=None) -> list[np.ndarray]:
    """Random partition of ``range(n)`` into K subsets whose sizes differ by at most one."""
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= n, got K={K}, n={n}")
    perm = as_generator(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, K)]


def subset_posteriors(data: RegressionData, K: int, seed=None,
                      prior: GaussianParams | None = None) -> list[PosteriorParams]:
    parts = split_indices(data.n, K, seed)
    return [subset_power_posterior(data.subset(idx), data.n / len(idx), prior) for idx in parts]


def wasp(subset_posts, draws_per_subset: int = 200, support_size: int = 10,
         seed: int = 0, opts: SolverOptions | None = None) -> DiscreteMeasure:
    """Barycenter of uniform empirical measures drawn from each subset posterior."""
    if support_size < 1:
        raise ValueError("support_size must be >= 1")
    measures = [make_measure(sample(post, draws_per_subset, stream(seed, k)))
                for k, post in enumerate(subset_posts)]
    if opts is None:
        opts = SolverOptions(support_size=support_size, rng_seed=seed)
    else:
        opts = SolverOptions(**{**opts.__dict__, "support_size": support_size})
    return solve(make_family(measures), opts).measure
