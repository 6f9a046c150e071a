import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import NumericalDegeneracyError
from srsi.core.models import (
    GpState, JointInputModel, KernelParams, PairIndex, ProbabilitySimplex, SimulationLog,
)
from srsi.gp.kernels import build_context, prior_covariance
from srsi.gp.noise import plugin_noise, plugin_noise_grid
from srsi.gp.posterior import (
    pairwise_sigma, pairwise_sigma_grid, posterior, posterior_at_models, posterior_from_observations,
)


def small_context(n_solutions=3, n_models=4, seed=0):
    rng = np.random.default_rng(seed)
    models = [JointInputModel((ProbabilitySimplex(rng.dirichlet(np.ones(5))),)) for _ in range(n_models)]
    return build_context(np.arange(float(n_solutions)), models), models


def make_params():
    return KernelParams(tau_sq=1.5, lambda_=np.array([3.0]), vartheta=np.array([0.2]))


def make_log(entries, seed=1):
    rng = np.random.default_rng(seed)
    log = SimulationLog()
    for x, b, mean in entries:
        log.add_batch(PairIndex(x, b), mean + rng.normal(0.0, 0.5, size=5))
    return log


def test_no_observations_returns_prior():
    context, _ = small_context()
    params = make_params()
    mean, cov = posterior_from_observations(np.zeros((0, 2)), np.zeros(0), np.zeros(0), 2.0, params, context)

    assert np.allclose(mean, 2.0)
    assert np.allclose(cov, prior_covariance(params, context))


def test_noiseless_observation_is_interpolated():
    context, _ = small_context()
    pairs = np.array([[1, 2]])
    mean, cov = posterior_from_observations(pairs, np.array([5.0]), np.array([1e-12]), 0.0,
                                            make_params(), context)

    flat = 1 * context.n_models + 2
    assert mean[flat] == pytest.approx(5.0, abs=1e-6)
    assert cov[flat, flat] == pytest.approx(0.0, abs=1e-6)


def test_posterior_variance_never_exceeds_prior():
    context, _ = small_context()
    params = make_params()
    log = make_log([(0, 0, 1.0), (2, 3, 2.0), (1, 1, 0.5)])

    _, cov = posterior(log, 1.0, params, context)

    assert np.all(np.diag(cov) <= params.tau_sq + 1e-12)
    assert np.allclose(cov, cov.T)


def test_posterior_uses_sample_variance_over_count():
    context, _ = small_context()
    params = make_params()
    log = make_log([(0, 1, 3.0), (2, 2, -1.0)])
    pairs, means, variances, counts = log.arrays()

    expected = posterior_from_observations(pairs, means, variances / counts, 0.5, params, context)
    actual = posterior(log, 0.5, params, context)

    assert np.allclose(actual[0], expected[0])
    assert np.allclose(actual[1], expected[1])


def test_pairwise_sigma_matches_grid_and_is_zero_at_xhat():
    context, _ = small_context()
    params = make_params()
    log = make_log([(0, 0, 1.0), (1, 2, 2.0)])
    mu, V = posterior(log, 0.0, params, context)
    state = GpState(mu, V, 0.0, params, np.ones(context.size), context.n_solutions, context.n_models)

    grid = pairwise_sigma_grid(state, xhat=1)

    assert grid.shape == (3, 4)
    assert np.allclose(grid[1], 0.0)
    assert grid[2, 3] == pytest.approx(pairwise_sigma(state, 1, 2, 3))
    assert pairwise_sigma(state, 1, 1, 0) == 0.0


def test_posterior_at_new_models_matches_full_posterior():
    context, models = small_context(n_models=5)
    params = make_params()
    log = make_log([(0, 0, 1.0), (1, 1, 1.5), (2, 2, 0.0), (0, 3, 2.0)])
    xhat = 1

    mu, V = posterior(log, 0.3, params, context)
    means, sigma = posterior_at_models(log, 0.3, params, context, [4], xhat)

    flat = np.arange(context.n_solutions) * context.n_models + 4
    assert np.allclose(means[:, 0], mu[flat])
    expected = V[flat[xhat], flat[xhat]] - 2.0 * V[flat[xhat], flat] + np.diag(V)[flat]
    expected[xhat] = 0.0
    assert np.allclose(sigma[:, 0] ** 2, np.maximum(expected, 0.0))


def test_plugin_noise_falls_back_to_solution_then_global():
    log = SimulationLog()
    log.add_batch(PairIndex(0, 0), np.array([1.0, 3.0]))        # variance 2
    log.add_batch(PairIndex(0, 1), np.array([0.0, 4.0]))        # variance 8
    log.add_batch(PairIndex(2, 0), np.array([1.0, 2.0]))        # variance 0.5

    assert plugin_noise(log, PairIndex(0, 1)) == pytest.approx(8.0)
    assert plugin_noise(log, PairIndex(0, 5)) == pytest.approx(5.0)
    assert plugin_noise(log, PairIndex(1, 0)) == pytest.approx(3.5)

    grid = plugin_noise_grid(log, 3, 2).reshape(3, 2)
    assert grid.tolist() == pytest.approx([[2.0, 8.0], [3.5, 3.5], [0.5, 0.5]])


def test_plugin_noise_needs_output():
    with pytest.raises(NumericalDegeneracyError):
        plugin_noise(SimulationLog(), PairIndex(0, 0))
    with pytest.raises(NumericalDegeneracyError):
        plugin_noise_grid(SimulationLog(), 2, 2)


def test_plugin_noise_grid_applies_floor():
    log = SimulationLog()
    log.add_batch(PairIndex(0, 0), np.array([1.0, 1.0]))

    assert plugin_noise_grid(log, 1, 1, floor=1e-10).tolist() == [1e-10]
