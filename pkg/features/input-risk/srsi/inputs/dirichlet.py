"""
Dirichlet input models over the distinct support of real-world data.

The posterior of each source's weight vector is Dirichlet with
concentrations counts + kappa. Posterior draws (the Bayesian bootstrap)
normalize independent Gamma(concentration, 1) variates.
"""

import logging
from typing import List, Sequence

import numpy as np

from ..core.exceptions import DegeneratePosteriorError, InputModelError
from ..core.models import (
    DirichletPosterior, JointInputModel, ObservationSet, ProbabilitySimplex,
)

logger = logging.getLogger(__name__)


def _canonical_key(row: np.ndarray) -> tuple:
    return tuple(repr(float(value)) for value in np.atleast_1d(row))


def observation_set_from_values(values, source_index: int = 0) -> ObservationSet:
    """
    Aggregate raw observations on their distinct values.

    Ties are detected by equality of the canonical decimal form of each
    component, so scalar and vector observations are handled alike.

    Args:
        values: Sequence of scalars or equal-length vectors
        source_index: Index of the input source

    Returns:
        ObservationSet with support sorted lexicographically
    """
    raw = np.asarray(values, dtype=float)
    if raw.size == 0:
        raise InputModelError("no observations given", source_index)
    if raw.ndim == 1:
        raw = raw[:, None]
    groups = {}
    for row in raw:
        key = _canonical_key(row)
        if key in groups:
            groups[key][1] += 1
        else:
            groups[key] = [row, 1]
    ordered = sorted(groups.values(), key=lambda item: tuple(item[0]))
    support = np.array([item[0] for item in ordered])
    counts = np.array([item[1] for item in ordered], dtype=int)
    return ObservationSet(source_index, raw, support, counts)


def observation_set_from_counts(support, counts, source_index: int = 0) -> ObservationSet:
    """Build an ObservationSet from pre-aggregated (value, count) data."""
    support = np.asarray(support, dtype=float)
    if support.ndim == 1:
        support = support[:, None]
    counts = np.asarray(counts, dtype=int)
    keep = counts > 0
    return ObservationSet(source_index, np.zeros((0, support.shape[1])), support[keep], counts[keep])


def build_posterior(data: ObservationSet, kappa) -> DirichletPosterior:
    """
    Dirichlet posterior of one source's weights.

    Args:
        data: Observations of the source
        kappa: Prior concentrations, one per support point (a scalar is broadcast)

    Returns:
        DirichletPosterior with concentrations counts + kappa
    """
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim == 0:
        kappa = np.full(data.support_size, float(kappa))
    if len(kappa) != data.support_size:
        raise InputModelError(
            f"kappa has {len(kappa)} entries, support has {data.support_size}", data.source_index
        )
    if np.any(kappa <= 0):
        raise InputModelError("kappa must be positive", data.source_index)
    return DirichletPosterior(concentrations=data.counts + kappa, prior_kappa=kappa)


def map_simplex(post: DirichletPosterior) -> ProbabilitySimplex:
    """Posterior mode of the weights."""
    excess = np.asarray(post.concentrations, dtype=float) - 1.0
    if np.any(excess < 0) or excess.sum() <= 0:
        raise DegeneratePosteriorError("posterior mode is not in the interior of the simplex")
    return ProbabilitySimplex(excess / excess.sum())


def sample_simplex(post: DirichletPosterior, rng: np.random.Generator) -> ProbabilitySimplex:
    """One draw from Dirichlet(concentrations)."""
    gammas = rng.gamma(post.concentrations, 1.0)
    return ProbabilitySimplex(gammas / gammas.sum())


def sample_joint(posteriors: Sequence[DirichletPosterior], count: int,
                 rng: np.random.Generator) -> List[JointInputModel]:
    """
    Draw ``count`` joint input models from the product posterior.

    Sources are drawn independently; all draws for source 0 come first,
    then source 1, and so on.
    """
    if count < 1:
        raise InputModelError(f"count must be >= 1, got {count}")
    per_source = []
    for post in posteriors:
        gammas = rng.gamma(post.concentrations, 1.0, size=(count, len(post.concentrations)))
        per_source.append(gammas / gammas.sum(axis=1, keepdims=True))
    models = [
        JointInputModel(tuple(ProbabilitySimplex(weights[b]) for weights in per_source))
        for b in range(count)
    ]
    logger.debug(f"Sampled {count} joint input models over {len(posteriors)} sources")
    return models


def map_joint(posteriors: Sequence[DirichletPosterior]) -> JointInputModel:
    """Joint model made of each source's MAP simplex."""
    return JointInputModel(tuple(map_simplex(post) for post in posteriors))


def simplex_mean(simplex: ProbabilitySimplex, support: np.ndarray) -> np.ndarray:
    """Mean of the discrete distribution placing ``weights`` on ``support``."""
    support = np.asarray(support, dtype=float)
    if support.ndim == 1:
        support = support[:, None]
    return np.asarray(simplex.weights) @ support


def draw_from_simplex(simplex: ProbabilitySimplex, support: np.ndarray, size: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Resample support points with probabilities ``weights``."""
    indices = rng.choice(len(simplex.weights), size=size, p=simplex.weights)
    return np.asarray(support)[indices]
