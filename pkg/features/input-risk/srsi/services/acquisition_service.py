"""
One-step lookahead sampling decisions.

For a candidate sampling decision the criterion is a Taylor-based lower
bound on the expected number of solutions whose risk set classification
changes after the next iteration. Distribution selection for each
solution uses folded-normal scores, so the criterion is evaluated only
once per solution and sampling mode.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from ..config.settings import ACQUISITION_CONFIG
from ..core.exceptions import ValidationError
from ..core.models import AcquisitionDecision, GpState, PairIndex, RiskSetEstimate
from ..gp.posterior import pairwise_variance_grid
from ..gp.updates import PredictiveUpdate, rank1_predict, rank2_predict
from .riskset_service import exceedance_terms

logger = logging.getLogger(__name__)


def limit_cdf(numerator: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Phi(numerator / scale) with Phi(+-inf) at zero scale and 0.5 for 0/0."""
    numerator = np.asarray(numerator, dtype=float)
    scale = np.asarray(scale, dtype=float)
    positive = scale > 0
    z = np.divide(numerator, scale, out=np.zeros_like(numerator), where=positive)
    degenerate = np.where(numerator > 0, 1.0, np.where(numerator < 0, 0.0, 0.5))
    return np.where(positive, norm.cdf(z), degenerate)


def folded_normal_mean(a1, a2) -> np.ndarray:
    """E|N(a1, a2^2)|; |a1| when a2 is 0."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    positive = a2 > 0
    ratio = np.divide(-a1, a2, out=np.zeros_like(a1), where=positive)
    value = (1.0 - 2.0 * norm.cdf(ratio)) * a1 + 2.0 * a2 * norm.pdf(ratio)
    return np.where(positive, value, np.abs(a1))


def _density_weights(gap: np.ndarray, sigma: np.ndarray, n_models: int) -> np.ndarray:
    positive = sigma > 0
    z = np.divide(gap, sigma, out=np.zeros_like(gap), where=positive)
    return np.where(positive, norm.pdf(z) / (n_models * np.where(positive, sigma, 1.0)), 0.0)


def expected_change(state: GpState, xhat: int, update: PredictiveUpdate,
                    current_set: RiskSetEstimate,
                    current_variance: Optional[np.ndarray] = None) -> float:
    """
    Taylor-based expected classification change for a predictive update.

    Args:
        state: Current posterior
        xhat: Candidate solution
        update: Rank-1 or rank-2 predictive update of the decision
        current_set: Current risk set (its alpha and delta are used)
        current_variance: Precomputed pairwise variance grid, for reuse across candidates

    Returns:
        Sum over x' != xhat of the probability that x' changes classification
    """
    if current_variance is None:
        current_variance = pairwise_variance_grid(state.V, xhat, state.n_solutions, state.n_models)
    factor = update.difference_factor(xhat)                    # (|X|, B, k)
    sigma_next = np.sqrt(np.maximum(current_variance - np.sum(factor ** 2, axis=-1), 0.0))

    means = state.mean_grid()
    gap = means[xhat][None, :] - means - current_set.delta
    A = exceedance_terms(gap, sigma_next).mean(axis=1)
    c = _density_weights(gap, sigma_next, state.n_models)
    scale = np.linalg.norm(np.einsum('xb,xbk->xk', c, factor), axis=1)

    numerator = np.where(current_set.included, current_set.alpha - A, A - current_set.alpha)
    terms = limit_cdf(numerator, scale)
    terms[xhat] = 0.0
    return float(terms.sum())


def expected_change_single(state: GpState, xhat: int, x: int, b: int, R: int,
                           current_set: RiskSetEstimate,
                           current_variance: Optional[np.ndarray] = None) -> float:
    """Expected classification change after R replications at (x, P_b)."""
    update = rank1_predict(state, PairIndex(x, b), R)
    return expected_change(state, xhat, update, current_set, current_variance)


def expected_change_pairwise(state: GpState, xhat: int, x: int, b: int, R: int,
                             current_set: RiskSetEstimate,
                             current_variance: Optional[np.ndarray] = None) -> float:
    """Expected classification change after R replications at both (xhat, P_b) and (x, P_b)."""
    update = rank2_predict(state, PairIndex(xhat, b), PairIndex(x, b), R)
    return expected_change(state, xhat, update, current_set, current_variance)


def select_model_for_xhat(state: GpState, xhat: int) -> int:
    """Model with the largest posterior variance at xhat; lowest index on ties."""
    rows = xhat * state.n_models + np.arange(state.n_models)
    return int(np.argmax(np.diag(state.V)[rows]))


def _pair_blocks(state: GpState, xhat: int, x: int):
    models = np.arange(state.n_models)
    h = xhat * state.n_models + models
    j = x * state.n_models + models
    V = state.V
    return V[h, h], V[j, j], V[h, j], state.noise[h], state.noise[j]


def h_components(state: GpState, xhat: int, x: int, R: int, delta: float,
                 pairwise: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    The folded-normal arguments (a1, a2) for every model b.

    a1 is the change of Phi((mu(xhat,b) - mu(x,b) - delta) / sigma) when
    sigma_t shrinks to sigma_{t+1}; a2 is the standard deviation of the
    first-order change of that term driven by the predictive mean.
    """
    Vhh, Vxx, Vhx, vh, vx = _pair_blocks(state, xhat, x)
    sigma_sq = np.maximum(Vhh - 2.0 * Vhx + Vxx, 0.0)
    means = state.mean_grid()
    gap = means[xhat] - means[x] - delta

    if pairwise:
        sh, sx = np.sqrt(R / vh), np.sqrt(R / vx)
        l11 = np.sqrt(1.0 + sh * sh * Vhh)
        l21 = sh * sx * Vhx / l11
        l22 = np.sqrt(np.maximum(1.0 + sx * sx * Vxx - l21 * l21, 1e-300))
        u1 = sh * (Vhh - Vhx) / l11
        u2 = (sx * (Vhx - Vxx) - l21 * u1) / l22
        reduction = u1 * u1 + u2 * u2
    else:
        denominator = vx / R + Vxx
        w = np.divide(Vhx - Vxx, np.sqrt(denominator), out=np.zeros_like(Vhx), where=denominator > 0)
        reduction = w * w

    sigma = np.sqrt(sigma_sq)
    sigma_next = np.sqrt(np.maximum(sigma_sq - reduction, 0.0))
    a1 = exceedance_terms(gap, sigma_next) - exceedance_terms(gap, sigma)
    positive = sigma_next > 0
    z = np.divide(gap, sigma_next, out=np.zeros_like(gap), where=positive)
    a2 = np.where(positive, norm.pdf(z) * np.sqrt(reduction) / np.where(positive, sigma_next, 1.0), 0.0)
    return a1, a2


def score_h1(state: GpState, xhat: int, x: int, R: int, delta: float, b: Optional[int] = None):
    """Single-sampling distribution-selection score for every model, or for model b."""
    a1, a2 = h_components(state, xhat, x, R, delta, pairwise=False)
    scores = folded_normal_mean(a1, a2) / state.n_models
    return scores if b is None else float(scores[b])


def score_h2(state: GpState, xhat: int, x: int, R: int, delta: float, b: Optional[int] = None):
    """Pairwise-sampling distribution-selection score for every model, or for model b."""
    a1, a2 = h_components(state, xhat, x, R, delta, pairwise=True)
    scores = folded_normal_mean(a1, a2) / state.n_models
    return scores if b is None else float(scores[b])


def score_mean_gap(state: GpState, xhat: int, x: int, delta: float) -> np.ndarray:
    """-|delta - (mu(xhat,b) - mu(x,b))| / sigma_t(xhat, x, b)."""
    Vhh, Vxx, Vhx, _, _ = _pair_blocks(state, xhat, x)
    sigma = np.sqrt(np.maximum(Vhh - 2.0 * Vhx + Vxx, 0.0))
    means = state.mean_grid()
    distance = np.abs(delta - (means[xhat] - means[x]))
    scaled = np.divide(distance, sigma, out=np.zeros_like(distance), where=sigma > 0)
    return np.where(sigma > 0, -scaled, np.where(distance > 0, -np.inf, 0.0))


def score_sigma(state: GpState, xhat: int, x: int) -> np.ndarray:
    """sigma_t(xhat, x, b) for every model b."""
    Vhh, Vxx, Vhx, _, _ = _pair_blocks(state, xhat, x)
    return np.sqrt(np.maximum(Vhh - 2.0 * Vhx + Vxx, 0.0))


class AcquisitionService:
    """
    Chooses the next pair(s) to simulate.

    The ``srsi`` variant selects models with the folded-normal scores;
    ``srsi-m`` and ``srsi-v`` replace both scores by the mean-gap and the
    posterior standard deviation scores respectively.
    """

    def __init__(self, variant: str = 'srsi', config: Optional[Dict[str, Any]] = None):
        """
        Initialize the acquisition service.

        Args:
            variant: 'srsi', 'srsi-m', or 'srsi-v'
            config: Acquisition settings
        """
        if variant not in ('srsi', 'srsi-m', 'srsi-v'):
            raise ValidationError(f"No acquisition rule for variant {variant}", "variant", variant)
        self.variant = variant
        self.config = dict(ACQUISITION_CONFIG, **(config or {}))

    def select_model_for_x(self, state: GpState, xhat: int, x: int, R: int, delta: float) -> Tuple[int, int, float, float]:
        """
        Models for single and pairwise sampling of x.

        Returns:
            (P1 index, P2 index, H1 value, H2 value); ties go to the lowest index
        """
        if self.variant == 'srsi':
            h1 = score_h1(state, xhat, x, R, delta)
            h2 = score_h2(state, xhat, x, R, delta)
        else:
            h1 = score_mean_gap(state, xhat, x, delta) if self.variant == 'srsi-m' else score_sigma(state, xhat, x)
            h2 = h1
        b1, b2 = int(np.argmax(h1)), int(np.argmax(h2))
        return b1, b2, float(h1[b1]), float(h2[b2])

    def decide(self, state: GpState, xhat: int, R: int, current_set: RiskSetEstimate) -> AcquisitionDecision:
        """
        Evaluate every solution and return the best sampling decision.

        Args:
            state: Current posterior
            xhat: Candidate solution
            R: Replications per sampled pair this iteration
            current_set: Current risk set estimate

        Returns:
            AcquisitionDecision for the solution maximizing the discounted criterion
        """
        discount = float(self.config['pairwise_discount'])
        variance = pairwise_variance_grid(state.V, xhat, state.n_solutions, state.n_models)
        values = np.empty(state.n_solutions)
        modes: List[str] = []
        models: List[int] = []
        table: List[Dict[str, Any]] = []

        for x in range(state.n_solutions):
            if x == xhat:
                b = select_model_for_xhat(state, xhat)
                value = expected_change_single(state, xhat, xhat, b, R, current_set, variance)
                values[x] = value
                modes.append('single')
                models.append(b)
                table.append({'solution': x, 'P1': b, 'H1': None, 'P2': None, 'H2': None,
                              'single': value, 'pairwise': None})
                continue

            b1, b2, h1, h2 = self.select_model_for_x(state, xhat, x, R, current_set.delta)
            single = expected_change_single(state, xhat, x, b1, R, current_set, variance)
            pairwise = expected_change_pairwise(state, xhat, x, b2, R, current_set, variance)
            if single > discount * pairwise:
                values[x], mode, model = single, 'single', b1
            else:
                values[x], mode, model = discount * pairwise, 'pairwise', b2
            modes.append(mode)
            models.append(model)
            table.append({'solution': x, 'P1': b1, 'H1': h1, 'P2': b2, 'H2': h2,
                          'single': single, 'pairwise': pairwise})

        chosen = int(np.argmax(values))
        decision = AcquisitionDecision(
            mode=modes[chosen], solution=chosen, model=models[chosen],
            criterion_value=float(values[chosen]), xhat=xhat, table=table,
        )
        logger.debug(f"Decision: x={chosen}, model={decision.model}, mode={decision.mode}, "
                     f"criterion={decision.criterion_value:.4g}")
        return decision
