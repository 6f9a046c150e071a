"""
Pooled plug-in estimates of the simulation noise variance.
"""

import numpy as np

from ..core.exceptions import NumericalDegeneracyError
from ..core.models import PairIndex, SimulationLog


def plugin_noise(log: SimulationLog, pair: PairIndex) -> float:
    """
    Noise variance estimate v(x, P) at one pair.

    The pair's own sample variance when it was simulated, else the mean
    sample variance over simulated pairs sharing the solution, else the
    global mean over every simulated pair.
    """
    if not log.records:
        raise NumericalDegeneracyError("no simulation output yet", 'noise')
    key = (pair.solution_index, pair.model_index)
    if key in log.records:
        return log.records[key].variance
    same_solution = [r.variance for (x, _), r in log.records.items() if x == pair.solution_index]
    if same_solution:
        return float(np.mean(same_solution))
    return float(np.mean([r.variance for r in log.records.values()]))


def plugin_noise_grid(log: SimulationLog, n_solutions: int, n_models: int,
                      floor: float = 0.0) -> np.ndarray:
    """Plug-in noise variance for every pair, flattened as x * B + b."""
    if not log.records:
        raise NumericalDegeneracyError("no simulation output yet", 'noise')
    pairs, _, variances, _ = log.arrays()
    grid = np.full((n_solutions, n_models), np.nan)
    grid[pairs[:, 0], pairs[:, 1]] = variances

    totals = np.bincount(pairs[:, 0], weights=variances, minlength=n_solutions)
    counts = np.bincount(pairs[:, 0], minlength=n_solutions)
    pooled = np.where(counts > 0, totals / np.maximum(counts, 1), variances.mean())
    grid = np.where(np.isnan(grid), pooled[:, None], grid)
    return np.maximum(grid.ravel(), floor)
