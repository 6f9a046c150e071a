"""
Synthetic real-world data for the test problems.
"""

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..config.settings import (
    AMBULANCE_FREQUENCY_ANCHORS, AMBULANCE_FREQUENCY_DECAY, AMBULANCE_FREQUENCY_SEED,
)
from ..core.exceptions import DataFileError, ValidationError
from ..core.models import AmbulanceConfig, Mm1kConfig, ObservationSet
from ..core.streams import stream
from ..inputs.dirichlet import observation_set_from_values
from .ambulance import manhattan_distance

logger = logging.getLogger(__name__)


def default_frequency_map(config: Optional[AmbulanceConfig] = None) -> np.ndarray:
    """
    Call counts per neighborhood (0-based, row-major).

    Anchored neighborhoods get their fixed counts; the remaining calls are
    spread over the other neighborhoods by a seeded multinomial draw with
    weights exp(-d / decay), d the Manhattan distance to the busiest anchor.
    """
    config = config or AmbulanceConfig()
    side, total = config.grid_side, config.calls
    counts = np.zeros(config.neighborhoods, dtype=int)
    for neighborhood, calls in AMBULANCE_FREQUENCY_ANCHORS.items():
        if neighborhood <= config.neighborhoods:
            counts[neighborhood - 1] = calls
    remaining = total - counts.sum()
    if remaining < 0:
        raise ValidationError("anchor counts exceed the call total", 'calls', total)

    hub = max(AMBULANCE_FREQUENCY_ANCHORS, key=AMBULANCE_FREQUENCY_ANCHORS.get) - 1
    hub = min(hub, config.neighborhoods - 1)
    free = np.flatnonzero(counts == 0)
    if len(free) == 0:
        counts[hub] += remaining
        return counts
    weights = np.exp(-np.array([manhattan_distance(hub, j, side) for j in free]) / AMBULANCE_FREQUENCY_DECAY)
    rng = np.random.default_rng(AMBULANCE_FREQUENCY_SEED)
    counts[free] += rng.multinomial(remaining, weights / weights.sum())
    return counts


def load_frequency_map(path: Path, neighborhoods: int = 36) -> np.ndarray:
    """Read a frequency map: one count per line, or ``neighborhood,count`` with 1-based neighborhoods."""
    path = Path(path)
    if not path.exists():
        raise DataFileError(f"Frequency map not found: {path}", str(path))
    counts = np.zeros(neighborhoods, dtype=int)
    position = 0
    with open(path, 'r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, 1):
            text = line.strip()
            if not text or text.startswith('#'):
                continue
            parts = text.split(',')
            try:
                if len(parts) == 1:
                    index, value = position, int(parts[0])
                else:
                    index, value = int(parts[0]) - 1, int(parts[1])
            except ValueError:
                if line_number == 1:
                    continue
                raise DataFileError(f"Cannot parse frequency line: {text!r}", str(path), line_number)
            if not 0 <= index < neighborhoods or value < 0:
                raise DataFileError(f"Invalid neighborhood or count: {text!r}", str(path), line_number)
            counts[index] = value
            position += 1
    if counts.sum() == 0:
        raise DataFileError(f"Frequency map {path} has no calls", str(path))
    return counts


def generate_real_world_data(problem: str, m: int, seed: int, config=None) -> List[ObservationSet]:
    """
    Draw a synthetic real-world dataset.

    Args:
        problem: 'mm1k' or 'ambulance'
        m: Sample size per source
        seed: Run seed
        config: Mm1kConfig or AmbulanceConfig

    Returns:
        One ObservationSet per input source
    """
    if m < 1:
        raise ValidationError("sample size must be >= 1", 'm', m)
    rng = stream(seed, 'data')
    if problem == 'mm1k':
        config = config or Mm1kConfig()
        interarrivals = rng.exponential(config.arrival_mean, m)
        services = rng.exponential(config.service_mean, m)
        logger.info(f"Generated {m} interarrival and {m} service observations (seed {seed})")
        return [observation_set_from_values(interarrivals, 0), observation_set_from_values(services, 1)]
    if problem == 'ambulance':
        config = config or AmbulanceConfig()
        counts = (load_frequency_map(config.frequency_map, config.neighborhoods)
                  if config.frequency_map else default_frequency_map(config))
        locations = rng.choice(config.neighborhoods, size=m, p=counts / counts.sum())
        logger.info(f"Generated {m} call locations (seed {seed})")
        return [observation_set_from_values(locations.astype(float), 0)]
    raise ValidationError(f"Unknown problem: {problem}", 'problem', problem)
