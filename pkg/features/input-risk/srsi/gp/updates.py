"""
One-step predictive updates of the GP posterior.

Simulating R replications at one pair (rank-1) or at the two pairs
(xhat, P) and (x, P) (rank-2) changes the posterior mean by G xi with
xi ~ N(0, I_k), and the posterior covariance deterministically to
V - G G^T. Both updates are Sherman-Morrison-Woodbury corrections
assembled from columns of the current covariance.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg as spla

from ..core.exceptions import NumericalDegeneracyError
from ..core.models import GpState, PairIndex
from .posterior import pairwise_variance_grid

logger = logging.getLogger(__name__)


@dataclass
class PredictiveUpdate:
    """Predictive law of the next posterior mean after a candidate sampling decision."""
    pairs: List[PairIndex]
    factor: np.ndarray              # G, shape (|X| B, k)
    state: GpState

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    def predictive_covariance(self) -> np.ndarray:
        """Covariance of mu_{t+1} given the current information."""
        return self.factor @ self.factor.T

    def next_covariance(self) -> np.ndarray:
        """Deterministic V_{t+1}."""
        return self.state.V - self.factor @ self.factor.T

    def difference_factor(self, xhat: int) -> np.ndarray:
        """
        Rows G(xhat, b) - G(x', b) for every (x', b), shape (|X|, B, k).

        For rank-1 this is the w vector; for rank-2 its rows are d^T D^{-T}.
        """
        grid = self.factor.reshape(self.state.n_solutions, self.state.n_models, self.rank)
        return grid[xhat][None, :, :] - grid

    def sigma_next(self, xhat: int) -> np.ndarray:
        """sigma_{t+1}(xhat, x', b) for every (x', b), shape (|X|, B)."""
        current = pairwise_variance_grid(self.state.V, xhat, self.state.n_solutions, self.state.n_models)
        reduction = np.sum(self.difference_factor(xhat) ** 2, axis=-1)
        return np.sqrt(np.maximum(current - reduction, 0.0))

    def sample_next_mean(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        """Draws of mu_{t+1}, shape (size, |X| B)."""
        xi = rng.standard_normal((size, self.rank))
        return self.state.mu[None, :] + xi @ self.factor.T


def rank1_predict(state: GpState, pair: PairIndex, R: int,
                  noise: Optional[float] = None) -> PredictiveUpdate:
    """
    Predictive update for R replications at one pair.

    Args:
        state: Current posterior
        pair: Pair to simulate
        R: Number of replications
        noise: Noise variance at the pair; the state's plug-in value when None

    Returns:
        PredictiveUpdate with factor V[:, p] / sqrt(v/R + V[p, p])

    Raises:
        NumericalDegeneracyError: When v/R + V[p, p] <= 0
    """
    p = state.index(pair.solution_index, pair.model_index)
    v = state.noise[p] if noise is None else noise
    denominator = v / R + state.V[p, p]
    if not denominator > 0:
        raise NumericalDegeneracyError(f"predictive denominator {denominator!r} at {pair}", 'rank1')
    factor = state.V[:, p] / np.sqrt(denominator)
    return PredictiveUpdate([pair], factor[:, None], state)


def rank2_predict(state: GpState, xhat_pair: PairIndex, x_pair: PairIndex, R: int,
                  noise: Optional[tuple] = None) -> PredictiveUpdate:
    """
    Predictive update for R replications at each of two pairs.

    With C = [sqrt(R/v1) V[:, p1], sqrt(R/v2) V[:, p2]] and D the lower
    Cholesky factor of I + diag(s) V[S, S] diag(s), the predictive
    covariance of mu_{t+1} is C D^{-T} D^{-1} C^T.

    Raises:
        NumericalDegeneracyError: When the 2 x 2 matrix is not positive definite
    """
    if xhat_pair == x_pair:
        raise NumericalDegeneracyError("pairwise update needs two distinct pairs", 'rank2')
    idx = np.array([state.index(xhat_pair.solution_index, xhat_pair.model_index),
                    state.index(x_pair.solution_index, x_pair.model_index)])
    v = state.noise[idx] if noise is None else np.asarray(noise, dtype=float)
    if np.any(v <= 0):
        raise NumericalDegeneracyError("noise variance must be positive for pairwise updates", 'rank2')
    scale = np.sqrt(R / v)
    C = state.V[:, idx] * scale[None, :]
    M = np.eye(2) + scale[:, None] * state.V[np.ix_(idx, idx)] * scale[None, :]
    try:
        D = spla.cholesky(M, lower=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalDegeneracyError(f"2x2 predictive matrix not positive definite: {e}", 'rank2')
    factor = spla.solve_triangular(D, C.T, lower=True).T
    return PredictiveUpdate([xhat_pair, x_pair], factor, state)
