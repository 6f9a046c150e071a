"""
Binary checkpoint of a GP posterior and its simulation log.

Layout: 8-byte magic, little-endian uint32 version, uint32 header length,
UTF-8 JSON header, then little-endian float64 payload holding mu, V
(row-major), the log means and the log variances.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.exceptions import CheckpointError, ValidationError
from ..core.models import GpState, KernelParams, PairRecord, SimulationLog
from ..gp.noise import plugin_noise_grid

logger = logging.getLogger(__name__)

MAGIC = b'SRSICKPT'
VERSION = 1
_PREFIX = len(MAGIC) + 8


def save_checkpoint(path: Path, state: GpState, log: SimulationLog, xhat: int,
                    extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write a checkpoint.

    Args:
        path: Output file
        state: Posterior to save
        log: Simulation log the posterior conditions on
        xhat: Candidate solution of the run
        extra: Additional JSON-serializable header entries (seed, alpha, delta, ...)

    Returns:
        The written path
    """
    path = Path(path)
    pairs, means, variances, counts = log.arrays()
    header = dict(extra or {})
    header.update({
        'n_solutions': state.n_solutions,
        'n_models': state.n_models,
        'beta0': float(state.beta0),
        'params': state.params.to_dict(),
        'xhat': int(xhat),
        'iteration': int(log.iteration),
        'pairs': pairs.tolist(),
        'counts': counts.tolist(),
    })
    header.setdefault('noise_floor', 0.0)
    encoded = json.dumps(header, sort_keys=True).encode('utf-8')
    payload = np.concatenate([state.mu, state.V.ravel(), means, variances]).astype('<f8')

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as handle:
        handle.write(MAGIC)
        handle.write(np.array([VERSION, len(encoded)], dtype='<u4').tobytes())
        handle.write(encoded)
        handle.write(payload.tobytes())
    logger.info(f"Checkpoint saved: {path}")
    return path


def load_checkpoint(path: Path) -> Tuple[GpState, SimulationLog, Dict[str, Any]]:
    """
    Read a checkpoint.

    Returns:
        (GpState, SimulationLog, header)

    Raises:
        CheckpointError: Missing file, bad magic, unknown version, or truncated payload
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}", str(path))
    data = path.read_bytes()
    if len(data) < _PREFIX or data[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"Not a checkpoint file: {path}", str(path))
    version, header_length = (int(v) for v in np.frombuffer(data[len(MAGIC):_PREFIX], dtype='<u4'))
    if version != VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}", str(path))

    try:
        header = json.loads(data[_PREFIX:_PREFIX + header_length].decode('utf-8'))
        n = int(header['n_solutions']) * int(header['n_models'])
        n_pairs = len(header['pairs'])
        payload = np.frombuffer(data[_PREFIX + header_length:], dtype='<f8')
        if len(payload) != n + n * n + 2 * n_pairs:
            raise ValueError(f"payload holds {len(payload)} values, expected {n + n * n + 2 * n_pairs}")
        params = KernelParams.from_dict(header['params'])
    except (ValueError, KeyError, TypeError, UnicodeDecodeError, ValidationError) as e:
        raise CheckpointError(f"Corrupt checkpoint {path}: {e}", str(path)) from e

    mu = payload[:n].copy()
    V = payload[n:n + n * n].reshape(n, n).copy()
    means = payload[n + n * n:n + n * n + n_pairs]
    variances = payload[n + n * n + n_pairs:]

    log = SimulationLog(iteration=int(header.get('iteration', 0)))
    for (x, b), count, mean, variance in zip(header['pairs'], header['counts'], means, variances):
        log.records[(int(x), int(b))] = PairRecord(float(mean), float(variance), int(count))

    noise = plugin_noise_grid(log, int(header['n_solutions']), int(header['n_models']),
                              float(header.get('noise_floor', 0.0)))
    state = GpState(mu=mu, V=V, beta0=float(header['beta0']), params=params, noise=noise,
                    n_solutions=int(header['n_solutions']), n_models=int(header['n_models']))
    logger.info(f"Checkpoint loaded: {path}")
    return state, log, header
