"""
Gaussian process metamodel over solution-model pairs.
"""

from .kernels import (
    KernelContext, build_context, gamma_x, gamma_m, kernel, gram, cross_gram,
    prior_covariance, check_positive_definite, cholesky_with_jitter, pair_to_flat, flat_to_pair,
)
from .posterior import (
    posterior, posterior_from_observations, pairwise_sigma, pairwise_sigma_grid,
    pairwise_variance_grid, all_pairs, posterior_at_models,
)
from .updates import PredictiveUpdate, rank1_predict, rank2_predict
from .noise import plugin_noise, plugin_noise_grid
from .mle import fit_mle, estimate_beta0, profile_log_likelihood
from .surrogate import SurrogateModel

__all__ = [
    'KernelContext', 'build_context', 'gamma_x', 'gamma_m', 'kernel', 'gram', 'cross_gram',
    'prior_covariance', 'check_positive_definite', 'cholesky_with_jitter', 'pair_to_flat', 'flat_to_pair',
    'posterior', 'posterior_from_observations', 'pairwise_sigma', 'pairwise_sigma_grid',
    'pairwise_variance_grid', 'all_pairs', 'posterior_at_models',
    'PredictiveUpdate', 'rank1_predict', 'rank2_predict',
    'plugin_noise', 'plugin_noise_grid',
    'fit_mle', 'estimate_beta0', 'profile_log_likelihood',
    'SurrogateModel',
]
