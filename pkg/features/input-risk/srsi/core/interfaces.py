"""
Abstract interfaces for risk set inference components.
"""

from abc import ABC, abstractmethod
from typing import List

import numpy as np

from .models import JointInputModel, ObservationSet, RunConfig, RunResult


class SimulationProblemInterface(ABC):
    """Interface for a stochastic simulation problem with uncertain inputs."""

    name: str = "problem"

    @property
    @abstractmethod
    def solutions(self) -> np.ndarray:
        """Solution coordinates, shape (|X|, d)."""
        pass

    @property
    @abstractmethod
    def data(self) -> List[ObservationSet]:
        """Real-world observations, one set per input source."""
        pass

    @abstractmethod
    def simulate(self, solution_index: int, model: JointInputModel,
                 rng: np.random.Generator) -> float:
        """Run one replication at a (solution, input model) pair."""
        pass

    def support(self, source_index: int) -> np.ndarray:
        """Distinct observed values of one input source, shape (u, dim)."""
        return self.data[source_index].distinct_support

    def parameters(self, model: JointInputModel) -> List[np.ndarray]:
        """Per-source parameter vectors used when a source is flagged parametric."""
        raise NotImplementedError(f"{self.name} has no parametric summary")

    @property
    def has_oracle(self) -> bool:
        return False

    def true_mean(self, solution_index: int, model: JointInputModel) -> float:
        """Exact conditional mean at a pair, when available."""
        raise NotImplementedError(f"{self.name} has no analytic mean")

    @property
    def n_solutions(self) -> int:
        return len(self.solutions)

    def solution_labels(self) -> List[str]:
        """Display names of the solutions."""
        return [str(i) for i in range(self.n_solutions)]


class ProcedureInterface(ABC):
    """Interface for a risk set estimation procedure."""

    @abstractmethod
    def run(self, config: RunConfig, problem: SimulationProblemInterface) -> RunResult:
        """Execute the procedure and return its result."""
        pass
