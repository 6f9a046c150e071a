"""
Stateful GP surrogate used by the sequential procedure.
"""

import logging
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ..config.settings import GP_CONFIG
from ..core.models import GpState, KernelParams, PairIndex, PairRecord, SimulationLog
from .kernels import KernelContext
from .mle import fit_mle
from .noise import plugin_noise_grid
from .posterior import posterior

logger = logging.getLogger(__name__)

# Smallest relative precision gain handled as a rank-1 update at a re-sampled pair
MIN_PRECISION_GAIN = 1e-6


class SurrogateModel:
    """
    Owns the simulation log and the posterior over every pair.

    After each batch of replications a rank-1 Sherman-Morrison-Woodbury
    correction keeps the posterior equal to the one conditioned on the
    merged log; it is recomputed from the log every ``refresh_interval``
    batches and on demand.
    """

    def __init__(self, context: KernelContext, params: KernelParams, beta0: float,
                 log: Optional[SimulationLog] = None, gp_config: Optional[Dict[str, Any]] = None):
        """
        Initialize the surrogate.

        Args:
            context: Kernel context (solutions and distance tables)
            params: Kernel hyperparameters
            beta0: Constant prior mean
            log: Simulation log; a new empty log when None
            gp_config: GP settings
        """
        self.context = context
        self.params = params
        self.beta0 = float(beta0)
        self.log = log if log is not None else SimulationLog()
        self.config = dict(GP_CONFIG, **(gp_config or {}))
        self.state: Optional[GpState] = None
        self._updates_since_refresh = 0
        self.last_drift = 0.0

    def refresh(self) -> GpState:
        """Recompute the posterior from the log."""
        mu, V = posterior(self.log, self.beta0, self.params, self.context,
                          noise_floor=self.config['noise_floor'], jitter=self.config['jitter'])
        diag = np.diag(V).copy()
        if np.any(diag < -1e-10 * self.params.tau_sq):
            logger.warning(f"Posterior variance {diag.min():.3e} below tolerance; clamping to 0")
        np.fill_diagonal(V, np.maximum(diag, 0.0))

        if self.state is not None and self._updates_since_refresh:
            scale = max(np.linalg.norm(V), 1e-300)
            self.last_drift = float(np.linalg.norm(self.state.V - V) / scale)
            if self.last_drift > self.config['drift_tolerance']:
                logger.warning(f"Incremental covariance drifted {self.last_drift:.3e} from the refreshed posterior")

        self.state = GpState(
            mu=mu, V=V, beta0=self.beta0, params=self.params,
            noise=self._noise(), n_solutions=self.context.n_solutions, n_models=self.context.n_models,
        )
        self._updates_since_refresh = 0
        return self.state

    def drift(self) -> float:
        """Relative Frobenius gap between the incremental and the recomputed covariance."""
        if self.state is None:
            return 0.0
        V = posterior(self.log, self.beta0, self.params, self.context,
                      noise_floor=self.config['noise_floor'], jitter=self.config['jitter'])[1]
        return float(np.linalg.norm(self.state.V - V) / max(np.linalg.norm(V), 1e-300))

    def _noise(self) -> np.ndarray:
        if not self.log.records:
            return np.full(self.context.size, self.config['noise_floor'])
        return plugin_noise_grid(self.log, self.context.n_solutions, self.context.n_models,
                                 self.config['noise_floor'])

    def _record_noise(self, record: PairRecord) -> float:
        return max(record.variance, self.config['noise_floor']) / record.count

    def _condition(self, pair: PairIndex, value: float, noise: float) -> bool:
        """Rank-1 update of the current state with one observation; False when the denominator vanishes."""
        state = self.state
        p = state.index(pair.solution_index, pair.model_index)
        denominator = noise + state.V[p, p]
        if not denominator > 0:
            return False
        column = state.V[:, p].copy()
        state.mu = state.mu + column * (value - state.mu[p]) / denominator
        state.V = state.V - np.outer(column, column) / denominator
        np.fill_diagonal(state.V, np.maximum(np.diag(state.V), 0.0))
        return True

    def observe(self, pair: PairIndex, outputs: np.ndarray) -> GpState:
        """
        Merge a batch of replications into the log and update the posterior.

        A new pair enters as one observation with noise S^2 / r. At a pair
        already in the log the old observation is replaced by the merged one:
        when the merged noise is smaller, the likelihood ratio of the two is
        itself a Gaussian observation and enters as a rank-1 update;
        otherwise the posterior is recomputed from the log.
        """
        if self.state is None:
            self.refresh()
        key = (pair.solution_index, pair.model_index)
        previous = self.log.records.get(key)
        self.log.add_batch(pair, outputs)
        merged = self.log.records[key]
        noise = self._record_noise(merged)

        if previous is None:
            updated = self._condition(pair, merged.mean, noise)
        else:
            old_noise = self._record_noise(previous)
            precision = 1.0 / noise - 1.0 / old_noise
            updated = precision > MIN_PRECISION_GAIN / noise
            if updated:
                value = (merged.mean / noise - previous.mean / old_noise) / precision
                updated = self._condition(pair, value, 1.0 / precision)

        if not updated:
            logger.debug(f"Recomputing posterior after re-sampling pair {key}")
            self._updates_since_refresh = 0
            return self.refresh()

        self.state.noise = self._noise()
        self._updates_since_refresh += 1
        if self._updates_since_refresh >= int(self.config['refresh_interval']):
            logger.info(f"Refreshing posterior after {self._updates_since_refresh} incremental updates")
            self.refresh()
        return self.state


    def observe_many(self, batches: Sequence) -> GpState:
        """Apply ``observe`` to (pair, outputs) items in order."""
        for pair, outputs in batches:
            self.observe(pair, outputs)
        return self.state

    def refit(self, rng: np.random.Generator) -> GpState:
        """Re-estimate hyperparameters on the current log and refresh."""
        self.beta0, self.params = fit_mle(self.log, self.context, rng, self.config)
        return self.refresh()
