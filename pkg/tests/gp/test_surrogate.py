import logging
import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.models import JointInputModel, KernelParams, PairIndex, ProbabilitySimplex, SimulationLog
from srsi.gp.kernels import build_context
from srsi.gp.posterior import posterior
from srsi.gp.surrogate import SurrogateModel


def make_surrogate(**gp_config):
    rng = np.random.default_rng(0)
    models = [JointInputModel((ProbabilitySimplex(rng.dirichlet(np.ones(4))),)) for _ in range(3)]
    context = build_context(np.arange(4.0), models)
    params = KernelParams(tau_sq=3.0, lambda_=np.array([2.0]), vartheta=np.array([0.5]))
    log = SimulationLog()
    log.add_batch(PairIndex(0, 0), np.array([1.0, 1.4, 0.8]))
    log.add_batch(PairIndex(3, 2), np.array([4.0, 3.5, 4.2]))
    return SurrogateModel(context, params, 2.0, log, gp_config)


def test_refresh_matches_batch_posterior():
    surrogate = make_surrogate()
    state = surrogate.refresh()

    mu, V = posterior(surrogate.log, 2.0, surrogate.params, surrogate.context, noise_floor=1e-10)
    assert np.allclose(state.mu, mu)
    assert np.allclose(state.V, V)
    assert state.noise.shape == (12,)


def test_incremental_update_at_new_pair_is_exact():
    surrogate = make_surrogate()
    surrogate.refresh()

    state = surrogate.observe(PairIndex(1, 1), np.array([2.0, 2.6, 2.3, 1.9]))

    mu, V = posterior(surrogate.log, 2.0, surrogate.params, surrogate.context, noise_floor=1e-10)
    assert np.allclose(state.mu, mu, atol=1e-9)
    assert np.allclose(state.V, V, atol=1e-9)
    assert surrogate.drift() < 1e-8


def test_refresh_interval_triggers_recompute():
    surrogate = make_surrogate(refresh_interval=2)
    surrogate.refresh()

    surrogate.observe(PairIndex(0, 0), np.array([1.2, 0.9]))
    assert surrogate._updates_since_refresh == 1
    surrogate.observe(PairIndex(2, 1), np.array([3.0, 3.3]))
    assert surrogate._updates_since_refresh == 0

    mu, V = posterior(surrogate.log, 2.0, surrogate.params, surrogate.context, noise_floor=1e-10)
    assert np.allclose(surrogate.state.V, V)
    assert surrogate.last_drift >= 0.0


def assert_matches_merged_log(surrogate):
    mu, V = posterior(surrogate.log, 2.0, surrogate.params, surrogate.context, noise_floor=1e-10)
    assert np.max(np.abs(surrogate.state.mu - mu)) <= 1e-8
    assert np.linalg.norm(surrogate.state.V - V) <= 1e-8 * np.linalg.norm(V)


def test_repeated_pair_merges_log_statistics():
    surrogate = make_surrogate()
    surrogate.observe_many([
        (PairIndex(0, 0), np.array([1.1, 0.9])),
        (PairIndex(0, 0), np.array([1.0, 1.3])),
    ])

    record = surrogate.log.records[(0, 0)]
    assert record.count == 7
    assert record.mean == pytest.approx(np.mean([1.0, 1.4, 0.8, 1.1, 0.9, 1.0, 1.3]))
    assert np.all(np.diag(surrogate.state.V) >= 0.0)


def test_resampled_pair_with_smaller_merged_noise_stays_exact():
    surrogate = make_surrogate()
    assert surrogate.config['refresh_interval'] == 500
    surrogate.refresh()

    surrogate.observe(PairIndex(0, 0), np.array([1.1, 0.9, 1.0, 1.05]))
    surrogate.observe(PairIndex(1, 1), np.array([2.0, 2.6, 2.3]))
    surrogate.observe(PairIndex(1, 1), np.array([2.2, 2.4, 2.3, 2.1, 2.5]))

    # all three were incremental updates
    assert surrogate._updates_since_refresh == 3
    assert_matches_merged_log(surrogate)


def test_resampled_pair_with_larger_merged_noise_stays_exact():
    surrogate = make_surrogate()
    surrogate.refresh()

    surrogate.observe(PairIndex(1, 1), np.array([2.0, 2.0000001]))
    state = surrogate.observe(PairIndex(1, 1), np.array([0.0, 6.0]))

    assert_matches_merged_log(surrogate)
    # the near-noiseless first batch no longer pins the pair
    assert state.V[4, 4] > 0.1


def test_refresh_warns_when_incremental_state_drifted(caplog):
    surrogate = make_surrogate()
    surrogate.refresh()
    surrogate.observe(PairIndex(1, 1), np.array([2.0, 2.6, 2.3]))
    surrogate.state.V = surrogate.state.V + 1e-3

    with caplog.at_level(logging.WARNING, logger='srsi.gp.surrogate'):
        surrogate.refresh()

    assert surrogate.last_drift > surrogate.config['drift_tolerance']
    assert any('drifted' in record.message for record in caplog.records)


def test_observe_reduces_variance_at_pair():
    surrogate = make_surrogate()
    before = surrogate.refresh().V[5, 5]

    after = surrogate.observe(PairIndex(1, 2), np.array([2.0, 2.5, 2.2])).V[5, 5]

    assert after < before
