"""
Seeded random streams.

Every random quantity in a run is drawn from a stream keyed by the run
seed, a purpose, and optional integer keys. Replication streams are keyed
by (solution, model, replication index), so outputs do not depend on the
order in which replications execute.
"""

import numpy as np

STREAM_PURPOSES = {
    'data': 0,
    'models': 1,
    'design': 2,
    'mle': 3,
    'xhat': 4,
    'replications': 5,
    'refine': 6,
    'simulate': 7,
}


def stream(seed: int, purpose: str, *keys: int) -> np.random.Generator:
    """Return the generator for ``purpose`` under ``seed``."""
    spawn_key = (STREAM_PURPOSES[purpose],) + tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))
