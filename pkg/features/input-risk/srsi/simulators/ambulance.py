"""
Ambulance dispatching from a single center on a square grid.

Calls arrive as a Poisson process and are served first-come first-served
by the next ambulance available at the center. An ambulance drives to the
patient and back to the center; each leg is Erlang with phase equal to
the Manhattan distance plus one. The response time runs from call receipt
to pick-up. Times are kept in hours and reported in minutes.
"""

import heapq
import logging
from collections import deque
from typing import Callable, Optional

import numpy as np

from ..core.exceptions import SimulationError
from ..core.models import AmbulanceConfig, ProbabilitySimplex

logger = logging.getLogger(__name__)

CALL, RETURN = 0, 1


def neighborhood_coordinates(side: int) -> np.ndarray:
    """(row, col) of every neighborhood in row-major order, shape (side^2, 2)."""
    index = np.arange(side * side)
    return np.column_stack([index // side, index % side]).astype(float)


def manhattan_distance(a: int, b: int, side: int) -> int:
    return abs(a // side - b // side) + abs(a % side - b % side)


def ambulance_replicate(center: int, location_simplex: ProbabilitySimplex,
                        config: Optional[AmbulanceConfig] = None,
                        rng: Optional[np.random.Generator] = None,
                        trace: Optional[Callable[[float, int, int], None]] = None) -> float:
    """
    Average response time (minutes) of patients picked up in the measurement window.

    Args:
        center: Neighborhood index of the dispatching center
        location_simplex: Call-location probabilities over every neighborhood
        config: Problem settings
        rng: Random stream
        trace: Optional callback receiving (time, idle, busy) after every event

    Raises:
        SimulationError: Bad center or simplex, broken invariants, or no pick-ups in the window
    """
    config = config or AmbulanceConfig()
    rng = rng or np.random.default_rng()
    side = config.grid_side
    if not 0 <= center < config.neighborhoods:
        raise SimulationError(f"center {center} is outside the grid", 'ambulance')
    if len(location_simplex) != config.neighborhoods:
        raise SimulationError(
            f"location simplex has {len(location_simplex)} entries, grid has {config.neighborhoods}",
            'ambulance',
        )

    scale = config.erlang_scale_minutes / 60.0
    start, end = config.warmup_hours, config.warmup_hours + config.window_hours

    # Poisson arrivals on [0, end)
    expected = config.call_rate * end
    gaps = rng.exponential(1.0 / config.call_rate, int(expected + 10 * np.sqrt(expected) + 10))
    times = np.cumsum(gaps)
    while times[-1] < end:
        times = np.concatenate([times, times[-1] + np.cumsum(rng.exponential(1.0 / config.call_rate, len(gaps)))])
    times = times[times < end]
    locations = rng.choice(config.neighborhoods, size=len(times), p=location_simplex.weights)
    phases = np.array([manhattan_distance(center, loc, side) + 1 for loc in locations])

    events = [(t, i, CALL, i) for i, t in enumerate(times)]
    heapq.heapify(events)
    sequence = len(events)
    idle, busy = config.ambulances, 0
    waiting = deque()
    last_dispatched = -1
    responses = []

    def dispatch(call: int, now: float):
        nonlocal sequence, last_dispatched
        if call < last_dispatched:
            raise SimulationError("dispatch out of first-come first-served order", 'ambulance')
        last_dispatched = call
        outbound = rng.gamma(phases[call], scale)
        inbound = rng.gamma(phases[call], scale)
        pickup = now + outbound
        if start <= pickup <= end:
            responses.append(pickup - times[call])
        heapq.heappush(events, (pickup + inbound, sequence, RETURN, call))
        sequence += 1

    while events:
        now, _, kind, call = heapq.heappop(events)
        if kind == CALL:
            if idle > 0:
                idle, busy = idle - 1, busy + 1
                dispatch(call, now)
            else:
                waiting.append(call)
        elif waiting:
            dispatch(waiting.popleft(), now)
        else:
            idle, busy = idle + 1, busy - 1
        if idle + busy != config.ambulances or idle < 0 or busy < 0:
            raise SimulationError(f"ambulance count broken: idle={idle}, busy={busy}", 'ambulance')
        if trace is not None:
            trace(now, idle, busy)

    if not responses:
        raise SimulationError("no patients picked up during the measurement window", 'ambulance')
    return 60.0 * float(np.mean(responses))
