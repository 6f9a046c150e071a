import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg as spla

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import ValidationError
from srsi.core.models import JointInputModel, KernelParams, PairIndex, ProbabilitySimplex, SimulationLog
from srsi.gp.kernels import build_context
from srsi.gp.mle import estimate_beta0, fit_mle, profile_log_likelihood

GP_SETTINGS = {'mle_restarts': 2}


def quadratic_design(seed=0):
    """Design over 6 solutions and 5 models of a response 10 - (x - 2.5)^2 + shift(P)."""
    rng = np.random.default_rng(seed)
    models = [JointInputModel((ProbabilitySimplex(rng.dirichlet(np.ones(4))),)) for _ in range(5)]
    context = build_context(np.arange(6.0), models)
    log = SimulationLog()
    for x in range(6):
        for b in range(0, 5, 2):
            truth = 10.0 - (x - 2.5) ** 2 + 2.0 * models[b][0].weights[0]
            log.add_batch(PairIndex(x, b), truth + rng.normal(0.0, 0.3, size=10))
    return log, context


def test_estimate_beta0_is_mean_for_identity_covariance():
    factor = spla.cho_factor(np.eye(4), lower=True)
    assert estimate_beta0(factor, np.array([1.0, 2.0, 3.0, 6.0])) == pytest.approx(3.0)


def test_fit_returns_parameters_within_bounds():
    log, context = quadratic_design()
    beta0, params = fit_mle(log, context, np.random.default_rng(1), GP_SETTINGS)

    y_var = np.var(log.arrays()[1], ddof=1)
    assert np.isfinite(beta0)
    assert 1e-6 * y_var * 0.999 <= params.tau_sq <= 1e3 * y_var * 1.001
    assert np.all((params.lambda_ >= 1e-4 * 0.999) & (params.lambda_ <= 1e4 * 1.001))
    assert np.all((params.vartheta >= 1e-4 * 0.999) & (params.vartheta <= 1e4 * 1.001))
    assert len(params.lambda_) == 1


def test_fit_beats_an_arbitrary_starting_point():
    log, context = quadratic_design(seed=3)
    _, fitted = fit_mle(log, context, np.random.default_rng(2), GP_SETTINGS)
    arbitrary = KernelParams(tau_sq=1.0, lambda_=np.array([0.01]), vartheta=np.array([100.0]))

    best, _ = profile_log_likelihood(fitted, log, context)
    other, _ = profile_log_likelihood(arbitrary, log, context)

    assert best >= other


def test_fit_is_reproducible_for_a_seed():
    log, context = quadratic_design()
    first = fit_mle(log, context, np.random.default_rng(8), GP_SETTINGS)
    second = fit_mle(log, context, np.random.default_rng(8), GP_SETTINGS)

    assert first[0] == pytest.approx(second[0])
    assert first[1].tau_sq == pytest.approx(second[1].tau_sq)


def test_fit_with_separate_length_scales():
    rng = np.random.default_rng(4)
    models = [JointInputModel((ProbabilitySimplex(rng.dirichlet(np.ones(3))),)) for _ in range(3)]
    grid = np.array([[i, j] for i in range(3) for j in range(3)], dtype=float)
    context = build_context(grid, models)
    log = SimulationLog()
    for x in range(9):
        log.add_batch(PairIndex(x, x % 3), grid[x].sum() + rng.normal(0.0, 0.1, size=4))

    _, params = fit_mle(log, context, rng, {'mle_restarts': 1, 'shared_lambda': False})

    assert len(params.lambda_) == 2


def test_fit_requires_replicated_design():
    log, context = quadratic_design()
    single = SimulationLog()
    single.add_batch(PairIndex(0, 0), np.array([1.0, 2.0]))

    with pytest.raises(ValidationError):
        fit_mle(single, context, np.random.default_rng(0), GP_SETTINGS)
