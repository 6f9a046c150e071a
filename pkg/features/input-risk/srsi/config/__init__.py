"""
Configuration module for risk set inference.
"""

from .settings import (
    MM1K_CONFIG,
    AMBULANCE_CONFIG,
    RUN_CONFIG,
    AMBULANCE_RUN_CONFIG,
    GP_CONFIG,
    ACQUISITION_CONFIG,
    get_config
)
from .loader import ExperimentSpec, load_experiment_spec, parse_spec_text

__all__ = [
    'MM1K_CONFIG', 'AMBULANCE_CONFIG', 'RUN_CONFIG', 'AMBULANCE_RUN_CONFIG',
    'GP_CONFIG', 'ACQUISITION_CONFIG', 'get_config',
    'ExperimentSpec', 'load_experiment_spec', 'parse_spec_text',
]
