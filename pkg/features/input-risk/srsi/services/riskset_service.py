"""
Risk set estimation from the GP posterior, and the indicator-based
estimators used as oracles and baselines.
"""

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from ..core.models import GpState, JointInputModel, RiskSetEstimate
from ..gp.kernels import build_context
from ..gp.posterior import pairwise_sigma_grid, posterior_at_models
from ..gp.surrogate import SurrogateModel

logger = logging.getLogger(__name__)


def exceedance_terms(gap: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """
    Phi(gap / sigma), with the indicator I(gap > 0) where sigma is 0.

    ``gap`` is mu(xhat, b) - mu(x, b) - delta.
    """
    gap = np.asarray(gap, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    positive = sigma > 0
    z = np.divide(gap, sigma, out=np.zeros_like(gap), where=positive)
    return np.where(positive, norm.cdf(z), (gap > 0).astype(float))


def risk_set_from_posterior(means: np.ndarray, sigma: np.ndarray, xhat: int,
                            alpha: float, delta: float) -> RiskSetEstimate:
    """
    Classify solutions from posterior means and pairwise standard deviations.

    Args:
        means: Posterior means, shape (|X|, B)
        sigma: sigma(xhat, x, b), shape (|X|, B)
        xhat: Candidate solution
        alpha: Risk level in (0, 1)
        delta: Indifference margin

    Returns:
        RiskSetEstimate
    """
    gap = means[xhat][None, :] - means - delta
    prob = exceedance_terms(gap, sigma).mean(axis=1)
    prob[xhat] = 0.0
    included = prob > alpha
    included[xhat] = False
    return RiskSetEstimate(included=included, prob_estimate=prob, alpha=alpha, delta=delta, xhat=xhat)


def estimate_risk_set(state: GpState, xhat: int, alpha: float, delta: float) -> RiskSetEstimate:
    """Plug-in risk set estimate of the current posterior."""
    return risk_set_from_posterior(state.mean_grid(), pairwise_sigma_grid(state, xhat), xhat, alpha, delta)


def risk_set_from_means(means: np.ndarray, xhat: int, alpha: float, delta: float) -> RiskSetEstimate:
    """Indicator estimator on exact or sample means, shape (|X|, B)."""
    means = np.asarray(means, dtype=float)
    prob = ((means[xhat][None, :] - means) > delta).mean(axis=1)
    prob[xhat] = 0.0
    included = prob > alpha
    included[xhat] = False
    return RiskSetEstimate(included=included, prob_estimate=prob, alpha=alpha, delta=delta, xhat=xhat)


def oracle_risk_set(true_means: Callable[[int, JointInputModel], float], xhat: int,
                    alpha: float, delta: float, models: Sequence[JointInputModel],
                    n_solutions: int) -> RiskSetEstimate:
    """Indicator risk set over the candidate models using exact conditional means."""
    grid = np.array([[true_means(x, model) for model in models] for x in range(n_solutions)])
    return risk_set_from_means(grid, xhat, alpha, delta)


def reclassify(state: GpState, xhat: int, alphas: Iterable[float],
               deltas: Iterable[float]) -> Dict[Tuple[float, float], RiskSetEstimate]:
    """Risk sets for every (alpha, delta) from one posterior, without new simulation."""
    means = state.mean_grid()
    sigma = pairwise_sigma_grid(state, xhat)
    grid = {}
    for delta in deltas:
        for alpha in alphas:
            grid[(float(alpha), float(delta))] = risk_set_from_posterior(means, sigma, xhat, alpha, delta)
    return grid


def quantile_risk_set(differences: np.ndarray, xhat: int, alpha: float, delta: float) -> RiskSetEstimate:
    """
    Value-at-risk form of the indicator estimator.

    x is included when the (floor(alpha B) + 1)-th largest difference
    exceeds delta; ``prob_estimate`` holds that order statistic.
    """
    differences = np.asarray(differences, dtype=float)
    B = differences.shape[1]
    rank = int(np.floor(alpha * B))
    quantile = -np.sort(-differences, axis=1)[:, rank] if rank < B else np.full(len(differences), -np.inf)
    included = quantile > delta
    included[xhat] = False
    return RiskSetEstimate(included=included, prob_estimate=quantile, alpha=alpha, delta=delta, xhat=xhat)


def difference_histogram(state: GpState, xhat: int) -> np.ndarray:
    """mu(xhat, b) - mu(x, b) for every (x, b), shape (|X|, B)."""
    means = state.mean_grid()
    return means[xhat][None, :] - means


def refine_risk_set(surrogate: SurrogateModel, models: Sequence[JointInputModel],
                    new_models: Sequence[JointInputModel], xhat: int, alpha: float, delta: float,
                    parameters: Optional[List[np.ndarray]] = None) -> RiskSetEstimate:
    """
    Reclassify against freshly drawn models using the frozen posterior.

    Args:
        surrogate: Surrogate of a finished run
        models: The run's candidate models, in design order
        new_models: Additional posterior draws to average over
        xhat: Candidate solution
        alpha: Risk level
        delta: Indifference margin
        parameters: Per-source parameter arrays over models + new_models (parametric sources only)

    Returns:
        RiskSetEstimate averaged over ``new_models``
    """
    params = surrogate.params
    combined = list(models) + list(new_models)
    context = build_context(surrogate.context.solutions, combined, params.divergence_kind,
                            params.parametric_flags, parameters)
    indices = range(len(models), len(combined))
    means, sigma = posterior_at_models(surrogate.log, surrogate.beta0, params, context, indices, xhat,
                                       surrogate.config['noise_floor'], surrogate.config['jitter'])
    logger.info(f"Refined risk set over {len(new_models)} new models")
    return risk_set_from_posterior(means, sigma, xhat, alpha, delta)
