"""
Gaussian process posterior over solution-model pairs.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spla

from ..core.models import GpState, KernelParams, SimulationLog
from .kernels import KernelContext, cholesky_with_jitter, cross_gram, gram

logger = logging.getLogger(__name__)


def all_pairs(context: KernelContext) -> np.ndarray:
    """Every (x, b) pair in flat order x * B + b, shape (|X| B, 2)."""
    xs, bs = np.meshgrid(np.arange(context.n_solutions), np.arange(context.n_models), indexing='ij')
    return np.column_stack([xs.ravel(), bs.ravel()])


def posterior_from_observations(pairs: np.ndarray, means: np.ndarray, noise_var: np.ndarray,
                                beta0: float, params: KernelParams, context: KernelContext,
                                query: Optional[Sequence] = None,
                                jitter: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Kriging posterior given observations with known noise variances.

    Args:
        pairs: Observed pairs, shape (n, 2); repeats allowed
        means: Observed sample means
        noise_var: Noise variance of each observed mean
        beta0: Constant prior mean
        params: Kernel hyperparameters
        context: Kernel context
        query: Pairs to predict (PairIndex list or (q, 2) array); all pairs when None
        jitter: Diagonal jitter multiple of tau^2 used on factorization failure

    Returns:
        (posterior mean, posterior covariance) over the query
    """
    query = all_pairs(context) if query is None else query
    prior = gram(query, params, context)
    if len(pairs) == 0:
        return np.full(len(prior), float(beta0)), prior

    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    K = gram(pairs, params, context) + np.diag(np.asarray(noise_var, dtype=float))
    factor, _ = cholesky_with_jitter(K, params.tau_sq, jitter)
    cross = cross_gram(pairs, query, params, context)          # (n, q)

    alpha = spla.cho_solve(factor, np.asarray(means, dtype=float) - beta0)
    mean = beta0 + cross.T @ alpha
    whitened = spla.solve_triangular(factor[0], cross, lower=True)
    cov = prior - whitened.T @ whitened
    return mean, 0.5 * (cov + cov.T)


def posterior(log: SimulationLog, beta0: float, params: KernelParams, context: KernelContext,
              query: Optional[Sequence] = None, noise_floor: float = 0.0,
              jitter: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior conditioned on a simulation log; each pair's noise is S^2 / r."""
    pairs, means, variances, counts = log.arrays()
    noise = np.maximum(variances, noise_floor) / np.maximum(counts, 1)
    return posterior_from_observations(pairs, means, noise, beta0, params, context, query, jitter)


def posterior_at_models(log: SimulationLog, beta0: float, params: KernelParams, context: KernelContext,
                        model_indices: Sequence[int], xhat: int, noise_floor: float = 0.0,
                        jitter: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Frozen posterior at models that were not part of the design.

    ``context`` must cover the design models and the new ones; the log only
    references design models. One model is evaluated at a time so the full
    covariance over every new pair is never formed.

    Returns:
        (means, sigma), both shape (|X|, len(model_indices)); sigma is the
        standard deviation of eta(xhat, b) - eta(x, b)
    """
    pairs, means, variances, counts = log.arrays()
    noise = np.maximum(variances, noise_floor) / np.maximum(counts, 1)
    K = gram(pairs, params, context) + np.diag(noise)
    factor, _ = cholesky_with_jitter(K, params.tau_sq, jitter)
    weights = spla.cho_solve(factor, means - beta0)

    solutions = np.arange(context.n_solutions)
    mean_grid = np.empty((context.n_solutions, len(model_indices)))
    sigma_grid = np.empty_like(mean_grid)
    for column, model in enumerate(model_indices):
        query = np.column_stack([solutions, np.full(context.n_solutions, int(model))])
        cross = cross_gram(pairs, query, params, context)
        whitened = spla.solve_triangular(factor[0], cross, lower=True)
        cov = gram(query, params, context) - whitened.T @ whitened
        mean_grid[:, column] = beta0 + cross.T @ weights
        variance = cov[xhat, xhat] - 2.0 * cov[xhat] + np.diag(cov)
        variance[xhat] = 0.0
        sigma_grid[:, column] = np.sqrt(np.maximum(variance, 0.0))
    return mean_grid, sigma_grid


def pairwise_variance_grid(V: np.ndarray, xhat: int, n_solutions: int, n_models: int) -> np.ndarray:
    """Var(eta(xhat, b) - eta(x, b)) for every (x, b), shape (|X|, B)."""
    models = np.arange(n_models)
    rows = xhat * n_models + models
    cols = np.arange(n_solutions)[:, None] * n_models + models[None, :]
    diag = np.diag(V)
    variance = diag[rows][None, :] - 2.0 * V[rows[None, :], cols] + diag[cols]
    variance[xhat] = 0.0
    return np.maximum(variance, 0.0)


def pairwise_sigma(state: GpState, xhat: int, x: int, b: int) -> float:
    """Posterior standard deviation of eta(xhat, b) - eta(x, b)."""
    if x == xhat:
        return 0.0
    i, j = state.index(xhat, b), state.index(x, b)
    variance = state.V[i, i] - 2.0 * state.V[i, j] + state.V[j, j]
    return float(np.sqrt(max(variance, 0.0)))


def pairwise_sigma_grid(state: GpState, xhat: int) -> np.ndarray:
    """pairwise_sigma for every (x, b), shape (|X|, B)."""
    return np.sqrt(pairwise_variance_grid(state.V, xhat, state.n_solutions, state.n_models))
