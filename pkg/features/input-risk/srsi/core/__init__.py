"""
Core risk set inference models and interfaces.
"""

from .models import (
    ObservationSet, DirichletPosterior, ProbabilitySimplex, JointInputModel,
    KernelParams, PairIndex, SimulationLog, GpState, RiskSetEstimate,
    AcquisitionDecision, RunConfig, RunResult,
)
from .exceptions import SrsiError, ConfigurationError, SimulationError
from .interfaces import SimulationProblemInterface, ProcedureInterface

__all__ = [
    'ObservationSet',
    'DirichletPosterior',
    'ProbabilitySimplex',
    'JointInputModel',
    'KernelParams',
    'PairIndex',
    'SimulationLog',
    'GpState',
    'RiskSetEstimate',
    'AcquisitionDecision',
    'RunConfig',
    'RunResult',
    'SrsiError',
    'ConfigurationError',
    'SimulationError',
    'SimulationProblemInterface',
    'ProcedureInterface'
]
