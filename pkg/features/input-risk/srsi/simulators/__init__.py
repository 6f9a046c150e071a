"""
Test problems: the M/M/1/k capacity queue and the ambulance dispatching center.
"""

from .mm1k import (
    balk_probability, expected_wait, mm1k_analytic_cost, steady_state_distribution,
    simulate_queue, mm1k_replicate_rates, mm1k_replicate,
)
from .ambulance import ambulance_replicate, neighborhood_coordinates, manhattan_distance
from .data_generation import default_frequency_map, load_frequency_map, generate_real_world_data
from .problems import Mm1kProblem, AmbulanceProblem, build_problem

__all__ = [
    'balk_probability', 'expected_wait', 'mm1k_analytic_cost', 'steady_state_distribution',
    'simulate_queue', 'mm1k_replicate_rates', 'mm1k_replicate',
    'ambulance_replicate', 'neighborhood_coordinates', 'manhattan_distance',
    'default_frequency_map', 'load_frequency_map', 'generate_real_world_data',
    'Mm1kProblem', 'AmbulanceProblem', 'build_problem',
]
