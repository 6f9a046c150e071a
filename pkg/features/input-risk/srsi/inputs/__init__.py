"""
Input models: real-world data, Dirichlet posteriors, and divergences.
"""

from .dirichlet import (
    build_posterior, map_simplex, sample_simplex, sample_joint, map_joint,
    simplex_mean, draw_from_simplex, observation_set_from_values,
    observation_set_from_counts,
)
from .divergence import divergence, divergence_table, cross_divergence_table, DIVERGENCE_KINDS
from .data_loader import load_observations, load_counts, load_data_file

__all__ = [
    'build_posterior', 'map_simplex', 'sample_simplex', 'sample_joint', 'map_joint',
    'simplex_mean', 'draw_from_simplex', 'observation_set_from_values',
    'observation_set_from_counts', 'divergence', 'divergence_table',
    'cross_divergence_table', 'DIVERGENCE_KINDS', 'load_observations',
    'load_counts', 'load_data_file',
]
