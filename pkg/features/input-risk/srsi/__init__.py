"""
Sequential risk set inference for simulation optimization under input uncertainty.

A Gaussian process over (solution, input model) pairs estimates, for a
candidate solution, the set of solutions that beat it by more than a
margin with posterior probability above a risk level. Simulation effort
is allocated one decision at a time to the pairs expected to change that
set the most.
"""

# Core models and interfaces
from .core.models import (
    ObservationSet, JointInputModel, KernelParams, PairIndex, SimulationLog, GpState,
    RiskSetEstimate, AcquisitionDecision, RunConfig, RunResult, Mm1kConfig, AmbulanceConfig,
)
from .core.exceptions import (
    SrsiError, ConfigurationError, SimulationError, FactorizationError, CheckpointError,
)
from .core.interfaces import SimulationProblemInterface, ProcedureInterface

# Main services
from .services.procedure_service import SrsiProcedure, run_srsi, run_variant, run_nmc
from .services.evaluation_service import EvaluationService, evaluate
from .services.acquisition_service import AcquisitionService
from .services.riskset_service import estimate_risk_set, reclassify, oracle_risk_set, refine_risk_set

# Problems
from .simulators.problems import Mm1kProblem, AmbulanceProblem, build_problem

# Configuration
from .config import RUN_CONFIG, GP_CONFIG, load_experiment_spec

__version__ = "1.0.0"

__all__ = [
    # Core models
    'ObservationSet',
    'JointInputModel',
    'KernelParams',
    'PairIndex',
    'SimulationLog',
    'GpState',
    'RiskSetEstimate',
    'AcquisitionDecision',
    'RunConfig',
    'RunResult',
    'Mm1kConfig',
    'AmbulanceConfig',
    'SimulationProblemInterface',
    'ProcedureInterface',

    # Exceptions
    'SrsiError',
    'ConfigurationError',
    'SimulationError',
    'FactorizationError',
    'CheckpointError',

    # Main services
    'SrsiProcedure',
    'run_srsi',
    'run_variant',
    'run_nmc',
    'EvaluationService',
    'evaluate',
    'AcquisitionService',
    'estimate_risk_set',
    'reclassify',
    'oracle_risk_set',
    'refine_risk_set',

    # Problems
    'Mm1kProblem',
    'AmbulanceProblem',
    'build_problem',

    # Configuration
    'RUN_CONFIG',
    'GP_CONFIG',
    'load_experiment_spec',
]
