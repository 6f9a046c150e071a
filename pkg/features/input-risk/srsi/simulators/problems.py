"""
Simulation problems exposed to the procedures.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..core.exceptions import ConfigurationError
from ..core.interfaces import SimulationProblemInterface
from ..core.models import AmbulanceConfig, JointInputModel, Mm1kConfig, ObservationSet, ProbabilitySimplex
from ..inputs.data_loader import load_data_file
from ..inputs.dirichlet import simplex_mean
from .ambulance import ambulance_replicate, neighborhood_coordinates
from .data_generation import generate_real_world_data
from .mm1k import mm1k_analytic_cost, mm1k_replicate

logger = logging.getLogger(__name__)


class Mm1kProblem(SimulationProblemInterface):
    """Choose the capacity k of an M/M/1/k queue; two sources (interarrival, service)."""

    name = 'mm1k'

    def __init__(self, config: Mm1kConfig, data: List[ObservationSet]):
        if len(data) != 2:
            raise ConfigurationError(f"M/M/1/k needs 2 input sources, got {len(data)}", key='problem.data_files')
        self.config = config
        self._data = data
        self._solutions = np.asarray(config.capacities, dtype=float)[:, None]
        self.supports = [self.support(source) for source in range(2)]

    @property
    def solutions(self) -> np.ndarray:
        return self._solutions

    @property
    def data(self) -> List[ObservationSet]:
        return self._data

    def solution_labels(self) -> List[str]:
        return [f"k={k}" for k in self.config.capacities]

    def capacity(self, solution_index: int) -> int:
        return int(self.config.capacities[solution_index])

    def means(self, model: JointInputModel):
        return (float(simplex_mean(model[0], self.supports[0])[0]),
                float(simplex_mean(model[1], self.supports[1])[0]))

    def simulate(self, solution_index: int, model: JointInputModel, rng: np.random.Generator) -> float:
        return mm1k_replicate(self.capacity(solution_index), model, self.supports, rng, self.config)

    def parameters(self, model: JointInputModel) -> List[np.ndarray]:
        return [simplex_mean(model[source], self.supports[source]) for source in range(2)]

    @property
    def has_oracle(self) -> bool:
        return True

    def true_mean(self, solution_index: int, model: JointInputModel) -> float:
        theta1, theta2 = self.means(model)
        return mm1k_analytic_cost(self.capacity(solution_index), theta1, theta2,
                                  self.config.waiting_cost, self.config.revenue)


class AmbulanceProblem(SimulationProblemInterface):
    """Choose the neighborhood of the dispatching center; one source (call locations)."""

    name = 'ambulance'

    def __init__(self, config: AmbulanceConfig, data: List[ObservationSet]):
        if len(data) != 1:
            raise ConfigurationError(f"ambulance problem needs 1 input source, got {len(data)}",
                                     key='problem.data_files')
        self.config = config
        self._data = data
        self._solutions = neighborhood_coordinates(config.grid_side)
        self.locations = self.support(0)[:, 0].astype(int)
        if self.locations.min() < 0 or self.locations.max() >= config.neighborhoods:
            raise ConfigurationError("call locations must be neighborhood indices", key='problem.data_files')

    @property
    def solutions(self) -> np.ndarray:
        return self._solutions

    @property
    def data(self) -> List[ObservationSet]:
        return self._data

    def solution_labels(self) -> List[str]:
        return [str(i + 1) for i in range(self.config.neighborhoods)]

    def grid_simplex(self, model: JointInputModel) -> ProbabilitySimplex:
        """Spread a simplex over the observed locations onto every neighborhood."""
        weights = np.zeros(self.config.neighborhoods)
        weights[self.locations] = model[0].weights
        return ProbabilitySimplex(weights / weights.sum())

    def simulate(self, solution_index: int, model: JointInputModel, rng: np.random.Generator) -> float:
        return ambulance_replicate(solution_index, self.grid_simplex(model), self.config, rng)

    def parameters(self, model: JointInputModel) -> List[np.ndarray]:
        coordinates = neighborhood_coordinates(self.config.grid_side)[self.locations]
        return [np.asarray(model[0].weights) @ coordinates]


def build_problem(name: str, config, seed: int, sample_size: int,
                  data_files: Optional[Sequence[Path]] = None) -> SimulationProblemInterface:
    """
    Assemble a problem from data files, or from synthetic data drawn under ``seed``.

    Args:
        name: 'mm1k' or 'ambulance'
        config: Problem configuration
        seed: Run seed (used for synthetic data)
        sample_size: Synthetic sample size per source
        data_files: One file per source, overriding synthetic data
    """
    if data_files:
        data = [load_data_file(path, i) for i, path in enumerate(data_files)]
    else:
        data = generate_real_world_data(name, sample_size, seed, config)
    if name == 'mm1k':
        return Mm1kProblem(config, data)
    if name == 'ambulance':
        return AmbulanceProblem(config, data)
    raise ConfigurationError(f"Unknown problem: {name}", key='problem.name')
