import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import SimulationError
from srsi.core.models import AmbulanceConfig, ProbabilitySimplex
from srsi.simulators.ambulance import ambulance_replicate, manhattan_distance, neighborhood_coordinates


def point_mass(index, size=36):
    weights = np.zeros(size)
    weights[index] = 1.0
    return ProbabilitySimplex(weights)


def test_neighborhood_coordinates_row_major():
    coords = neighborhood_coordinates(6)

    assert coords.shape == (36, 2)
    assert coords[7].tolist() == [1.0, 1.0]
    assert coords[35].tolist() == [5.0, 5.0]


def test_manhattan_distance_on_grid():
    assert manhattan_distance(0, 35, 6) == 10
    assert manhattan_distance(7, 8, 6) == 1
    assert manhattan_distance(14, 14, 6) == 0


def test_low_call_rate_gives_single_phase_response():
    config = AmbulanceConfig(call_rate=0.5, warmup_hours=10.0, window_hours=2000.0)

    response = ambulance_replicate(14, point_mass(14), config, np.random.default_rng(3))

    assert response == pytest.approx(7.2, abs=1.0)


def test_distant_calls_take_longer():
    config = AmbulanceConfig(call_rate=0.5, warmup_hours=10.0, window_hours=1000.0)

    near = ambulance_replicate(0, point_mass(1), config, np.random.default_rng(1))
    far = ambulance_replicate(0, point_mass(35), config, np.random.default_rng(1))

    assert far > near


def test_ambulance_count_is_conserved():
    config = AmbulanceConfig(call_rate=3.0, ambulances=2, warmup_hours=5.0, window_hours=50.0)
    seen = []

    def trace(now, idle, busy):
        seen.append((now, idle, busy))

    uniform = ProbabilitySimplex(np.full(36, 1.0 / 36))
    ambulance_replicate(20, uniform, config, np.random.default_rng(0), trace)

    assert seen
    assert all(idle + busy == 2 and idle >= 0 and busy >= 0 for _, idle, busy in seen)
    times = [t for t, _, _ in seen]
    assert times == sorted(times)


def test_replication_is_reproducible():
    config = AmbulanceConfig(warmup_hours=20.0, window_hours=30.0)
    uniform = ProbabilitySimplex(np.full(36, 1.0 / 36))

    first = ambulance_replicate(10, uniform, config, np.random.default_rng(9))
    second = ambulance_replicate(10, uniform, config, np.random.default_rng(9))

    assert first == second


def test_bad_center_and_simplex_rejected():
    config = AmbulanceConfig()
    with pytest.raises(SimulationError):
        ambulance_replicate(36, point_mass(0), config, np.random.default_rng(0))
    with pytest.raises(SimulationError):
        ambulance_replicate(0, point_mass(0, size=25), config, np.random.default_rng(0))


def test_empty_window_is_reported():
    config = AmbulanceConfig(call_rate=1e-4, warmup_hours=1.0, window_hours=0.01)
    with pytest.raises(SimulationError):
        ambulance_replicate(0, point_mass(0), config, np.random.default_rng(0))
