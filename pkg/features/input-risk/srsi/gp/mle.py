"""
Maximum likelihood estimation of the kernel hyperparameters.

The constant mean beta0 is profiled out in closed form; tau^2, the
solution length-scales and the model length-scales are searched in log
space with a bounded Powell (coordinate-direction) search from a
heuristic start and several random restarts.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spla
from scipy.optimize import minimize

from ..config.settings import GP_CONFIG
from ..core.exceptions import NumericalDegeneracyError, ValidationError
from ..core.models import KernelParams, SimulationLog
from .kernels import KernelContext

logger = logging.getLogger(__name__)

PENALTY = 1e25


def estimate_beta0(factor, Y: np.ndarray) -> float:
    """Generalized least squares constant: 1^T A^{-1} Y / 1^T A^{-1} 1."""
    ones = np.ones(len(Y))
    weights = spla.cho_solve(factor, ones)
    return float(weights @ Y / (weights @ ones))


@dataclass
class _DesignDistances:
    """Distances between design pairs, precomputed once per fit."""
    solution_sq: np.ndarray     # (d, n, n)
    model: np.ndarray           # (L, n, n)
    Y: np.ndarray
    noise: np.ndarray

    @classmethod
    def from_log(cls, log: SimulationLog, context: KernelContext,
                 noise_floor: float = 0.0) -> '_DesignDistances':
        pairs, means, variances, counts = log.arrays()
        xs, bs = pairs[:, 0], pairs[:, 1]
        coords = context.solutions[xs]
        solution_sq = np.moveaxis((coords[:, None, :] - coords[None, :, :]) ** 2, -1, 0)
        model = context.distances[:, bs[:, None], bs[None, :]]
        noise = np.maximum(variances, noise_floor) / counts
        return cls(solution_sq, model, means, noise)


class ParameterLayout:
    """Maps a flat log-parameter vector to KernelParams."""

    def __init__(self, dimension: int, n_sources: int, shared_lambda: bool,
                 divergence_kind: str, parametric_flags: Sequence[bool] = ()):
        self.n_lambda = 1 if shared_lambda else dimension
        self.dimension = dimension
        self.n_sources = n_sources
        self.divergence_kind = divergence_kind
        self.parametric_flags = tuple(parametric_flags) or tuple(False for _ in range(n_sources))

    @property
    def size(self) -> int:
        return 1 + self.n_lambda + self.n_sources

    def split(self, theta: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        values = np.exp(theta)
        tau_sq = values[0]
        lam = values[1:1 + self.n_lambda]
        vartheta = values[1 + self.n_lambda:]
        return tau_sq, lam, vartheta

    def to_params(self, theta: np.ndarray) -> KernelParams:
        tau_sq, lam, vartheta = self.split(theta)
        return KernelParams(float(tau_sq), lam.copy(), vartheta.copy(),
                            self.divergence_kind, self.parametric_flags)

    def from_params(self, params: KernelParams) -> np.ndarray:
        lam = np.atleast_1d(params.lambda_)[:self.n_lambda]
        return np.log(np.concatenate([[params.tau_sq], lam, params.vartheta]))


def _covariance(theta: np.ndarray, layout: ParameterLayout, design: _DesignDistances) -> np.ndarray:
    tau_sq, lam, vartheta = layout.split(theta)
    lam = np.repeat(lam, layout.dimension) if len(lam) == 1 else lam
    exponent = np.tensordot(1.0 / lam, design.solution_sq, axes=1)
    exponent += np.tensordot(1.0 / vartheta, design.model, axes=1)
    return tau_sq * np.exp(-exponent) + np.diag(design.noise)


def _factor(A: np.ndarray, tau_sq: float, jitter: float):
    try:
        return spla.cho_factor(A, lower=True)
    except (np.linalg.LinAlgError, ValueError):
        return spla.cho_factor(A + jitter * tau_sq * np.eye(len(A)), lower=True)


def profile_log_likelihood(params: KernelParams, log: SimulationLog, context: KernelContext,
                           noise_floor: float = 0.0, jitter: float = 1e-8) -> Tuple[float, float]:
    """
    Profile log-likelihood of the hyperparameters and the profiled beta0.

    Returns:
        (log-likelihood, beta0) with constants dropped:
        -1/2 log|A| - 1/2 (Y - beta0)^T A^{-1} (Y - beta0)
    """
    design = _DesignDistances.from_log(log, context, noise_floor)
    layout = ParameterLayout(context.dimension, context.n_sources, len(params.lambda_) == 1,
                             params.divergence_kind, params.parametric_flags)
    return _profile(layout.from_params(params), layout, design, jitter)


def _profile(theta: np.ndarray, layout: ParameterLayout, design: _DesignDistances,
             jitter: float) -> Tuple[float, float]:
    A = _covariance(theta, layout, design)
    factor = _factor(A, float(np.exp(theta[0])), jitter)
    beta0 = estimate_beta0(factor, design.Y)
    resid = design.Y - beta0
    log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
    value = -0.5 * log_det - 0.5 * resid @ spla.cho_solve(factor, resid)
    return float(value), beta0


def fit_mle(initial_design: SimulationLog, context: KernelContext, rng: np.random.Generator,
            gp_config: Optional[Dict[str, Any]] = None) -> Tuple[float, KernelParams]:
    """
    Fit beta0 and the kernel hyperparameters on the initial design.

    Args:
        initial_design: Log of the initial design, every pair with r >= 2
        context: Kernel context of the run
        rng: Stream for the random restarts
        gp_config: GP settings (bounds, restarts, tolerance, divergence)

    Returns:
        (beta0, KernelParams)

    Raises:
        NumericalDegeneracyError: When no start yields a finite likelihood
    """
    config = dict(GP_CONFIG, **(gp_config or {}))

    if initial_design.n_distinct < 2:
        raise ValidationError("MLE needs at least two design pairs", 'n0', initial_design.n_distinct)
    if any(record.count < 2 for record in initial_design.records.values()):
        raise ValidationError("every design pair needs r >= 2", 'r')

    flags = [bool(i in config['parametric_sources']) for i in range(context.n_sources)]
    layout = ParameterLayout(context.dimension, context.n_sources, config['shared_lambda'],
                             config['divergence'], flags)
    design = _DesignDistances.from_log(initial_design, context, config['noise_floor'])

    y_var = float(np.var(design.Y, ddof=1))
    scale = y_var if y_var > 0 else 1.0
    lam_lo, lam_hi = config['lambda_bounds']
    vt_lo, vt_hi = config['vartheta_bounds']
    tau_lo, tau_hi = config['tau_sq_bounds']
    lower = np.log([tau_lo * scale] + [lam_lo] * layout.n_lambda + [vt_lo] * layout.n_sources)
    upper = np.log([tau_hi * scale] + [lam_hi] * layout.n_lambda + [vt_hi] * layout.n_sources)
    bounds = list(zip(lower, upper))

    def objective(theta):
        try:
            value, _ = _profile(theta, layout, design, config['jitter'])
        except (np.linalg.LinAlgError, ValueError):
            return PENALTY
        return -value if np.isfinite(value) else PENALTY

    starts = [np.clip(_heuristic_start(design, context, layout, scale), lower, upper)]
    for _ in range(int(config['mle_restarts'])):
        starts.append(rng.uniform(lower, upper))

    best_theta, best_value = None, PENALTY
    for i, start in enumerate(starts):
        result = minimize(objective, start, method='Powell', bounds=bounds,
                          options={'ftol': config['mle_tolerance'], 'xtol': 1e-6, 'maxfev': 5000})
        logger.debug(f"MLE start {i}: objective {result.fun:.6g} after {result.nfev} evaluations")
        if result.fun < best_value:
            best_theta, best_value = np.clip(result.x, lower, upper), float(result.fun)

    if best_theta is None:
        raise NumericalDegeneracyError("profile likelihood is not finite at any start", 'mle')

    _, beta0 = _profile(best_theta, layout, design, config['jitter'])
    params = layout.to_params(best_theta)
    logger.info(
        f"MLE fit: beta0={beta0:.4g}, tau_sq={params.tau_sq:.4g}, "
        f"lambda={np.round(params.lambda_, 4).tolist()}, vartheta={np.round(params.vartheta, 4).tolist()}, "
        f"loglik={-best_value:.6g}"
    )
    return beta0, params


def _heuristic_start(design: _DesignDistances, context: KernelContext,
                     layout: ParameterLayout, scale: float) -> np.ndarray:
    spread = np.ptp(context.solutions, axis=0) ** 2
    spread = np.where(spread > 0, spread, 1.0)
    lam = [float(np.mean(spread))] if layout.n_lambda == 1 else list(spread)
    vartheta = []
    for table in design.model:
        positive = table[table > 0]
        vartheta.append(float(np.median(positive)) if len(positive) else 1.0)
    return np.log([scale] + lam + vartheta)
