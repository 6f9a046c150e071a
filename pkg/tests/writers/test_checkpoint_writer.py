import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import CheckpointError
from srsi.core.models import GpState, KernelParams, PairIndex, SimulationLog
from srsi.writers.checkpoint_writer import MAGIC, load_checkpoint, save_checkpoint


def make_state_and_log():
    log = SimulationLog(iteration=7)
    log.add_batch(PairIndex(0, 1), np.array([1.0, 2.0, 4.0]))
    log.add_batch(PairIndex(2, 0), np.array([0.5, 0.7]))
    rng = np.random.default_rng(0)
    A = rng.normal(size=(6, 6))
    params = KernelParams(tau_sq=1.3, lambda_=np.array([0.7]), vartheta=np.array([0.2, 4.0]),
                          divergence_kind='total_variation', parametric_flags=(False, True))
    state = GpState(mu=rng.normal(size=6), V=A @ A.T, beta0=-0.25, params=params,
                    noise=np.ones(6), n_solutions=3, n_models=2)
    return state, log


def test_checkpoint_preserves_posterior_and_log(tmp_path):
    state, log = make_state_and_log()
    path = save_checkpoint(tmp_path / "run.srsi", state, log, xhat=1, extra={'seed': 9, 'alpha': 0.1})

    loaded, loaded_log, header = load_checkpoint(path)

    assert np.array_equal(loaded.mu, state.mu)
    assert np.array_equal(loaded.V, state.V)
    assert loaded.beta0 == state.beta0
    assert loaded.params.to_dict() == state.params.to_dict()
    assert loaded_log.iteration == 7
    assert loaded_log.records[(0, 1)].count == 3
    assert loaded_log.records[(0, 1)].variance == pytest.approx(log.records[(0, 1)].variance)
    assert header['xhat'] == 1 and header['seed'] == 9 and header['alpha'] == 0.1
    assert loaded.noise.shape == (6,)


def test_file_starts_with_magic(tmp_path):
    state, log = make_state_and_log()
    path = save_checkpoint(tmp_path / "run.srsi", state, log, xhat=0)

    assert path.read_bytes()[:8] == MAGIC


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.srsi")


def test_wrong_magic(tmp_path):
    path = tmp_path / "other.srsi"
    path.write_bytes(b"NOTACKPT" + bytes(32))

    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_unsupported_version(tmp_path):
    state, log = make_state_and_log()
    path = save_checkpoint(tmp_path / "run.srsi", state, log, xhat=0)
    data = bytearray(path.read_bytes())
    data[8:12] = np.array([2], dtype='<u4').tobytes()
    path.write_bytes(bytes(data))

    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(path)
    assert "version" in str(excinfo.value)


def test_truncated_payload(tmp_path):
    state, log = make_state_and_log()
    path = save_checkpoint(tmp_path / "run.srsi", state, log, xhat=0)
    path.write_bytes(path.read_bytes()[:-16])

    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_garbled_header(tmp_path):
    state, log = make_state_and_log()
    path = save_checkpoint(tmp_path / "run.srsi", state, log, xhat=0)
    data = bytearray(path.read_bytes())
    data[16:20] = b"\xff\xfe{]"
    path.write_bytes(bytes(data))

    with pytest.raises(CheckpointError):
        load_checkpoint(path)
