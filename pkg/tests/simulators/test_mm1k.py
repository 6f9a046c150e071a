import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import ValidationError
from srsi.core.models import JointInputModel, Mm1kConfig, ProbabilitySimplex
from srsi.simulators.mm1k import (
    balk_probability, expected_wait, mm1k_analytic_cost, mm1k_replicate, mm1k_replicate_rates,
    simulate_queue, steady_state_distribution,
)


def test_balk_probability_reference_value():
    assert balk_probability(2, 1.0, 0.5) == pytest.approx(1.0 / 7.0)


def test_unit_load_with_single_place():
    assert balk_probability(1, 1.0, 1.0) == pytest.approx(0.5)
    assert expected_wait(1, 1.0, 1.0) == pytest.approx(0.0)
    assert mm1k_analytic_cost(1, 1.0, 1.0) == pytest.approx(-100.0)


def test_expected_wait_reference_value():
    assert expected_wait(2, 1.0, 0.5) == pytest.approx(1.0 / 6.0)
    assert expected_wait(1, 2.0, 3.0) == pytest.approx(0.0)


def test_unit_load_wait_excludes_service_time():
    assert expected_wait(3, 2.0, 2.0) == pytest.approx(2.0)
    assert expected_wait(3, 2.0, 2.0002) == pytest.approx(2.0, rel=1e-3)


def test_unit_load_is_continuous():
    near = mm1k_analytic_cost(5, 1.0, 1.0 + 1e-7)
    assert mm1k_analytic_cost(5, 1.0, 1.0) == pytest.approx(near, rel=1e-4)


def test_invalid_rates_rejected():
    with pytest.raises(ValidationError):
        balk_probability(0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        expected_wait(3, 0.0, 1.0)


def test_steady_state_distribution_is_geometric():
    pmf = steady_state_distribution(2, 0.5)
    assert pmf == pytest.approx([4 / 7, 2 / 7, 1 / 7])
    assert steady_state_distribution(3, 0.0).tolist() == [1.0, 0.0, 0.0, 0.0]


def test_simulate_queue_deterministic_times():
    # arrivals at 1, 2, 3 with service 1.5: waits 0, 0.5 and 1
    cost = simulate_queue(2, np.array([1.0, 1.0, 1.0]), np.array([1.5, 1.5, 1.5]), np.zeros(0), 1.0, 200.0)

    assert cost == pytest.approx(0.5 - 200.0)


def test_simulate_queue_balks_when_full():
    # capacity 1, every arrival before the first departure balks
    cost = simulate_queue(1, np.array([1.0, 0.1, 0.1, 5.0]), np.array([2.0, 2.0, 2.0, 2.0]),
                          np.zeros(0), 1.0, 200.0)

    assert cost == pytest.approx(-200.0 * 2 / 4)


def test_replicate_mean_matches_analytic_cost():
    rng = np.random.default_rng(11)
    k, theta1, theta2 = 3, 1.0, 0.8
    outputs = np.array([mm1k_replicate_rates(k, theta1, theta2, 2000, rng) for _ in range(200)])

    analytic = mm1k_analytic_cost(k, theta1, theta2)
    standard_error = outputs.std(ddof=1) / np.sqrt(len(outputs))
    assert abs(outputs.mean() - analytic) < 4 * standard_error + 0.05


def test_replicate_under_model_uses_simplex_means():
    supports = [np.array([[0.5], [1.5]]), np.array([[0.4], [1.2]])]
    model = JointInputModel((ProbabilitySimplex(np.array([0.5, 0.5])),
                             ProbabilitySimplex(np.array([0.5, 0.5]))))
    config = Mm1kConfig(customers=2000)

    outputs = [mm1k_replicate(4, model, supports, np.random.default_rng(i), config) for i in range(100)]

    assert np.mean(outputs) == pytest.approx(mm1k_analytic_cost(4, 1.0, 0.8), abs=1.5)


def test_resampled_support_replication_is_finite():
    supports = [np.array([[0.5], [1.5]]), np.array([[0.4], [1.2]])]
    model = JointInputModel((ProbabilitySimplex(np.array([0.3, 0.7])),
                             ProbabilitySimplex(np.array([0.6, 0.4]))))
    config = Mm1kConfig(customers=500, resample_support=True)

    value = mm1k_replicate(2, model, supports, np.random.default_rng(0), config)

    assert np.isfinite(value)
    assert -200.0 <= value
