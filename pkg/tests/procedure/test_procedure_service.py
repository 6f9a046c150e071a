import sys
from pathlib import Path

import numpy as np
import pytest
from joblib import parallel_config

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import SimulationError, ValidationError
from srsi.core.interfaces import SimulationProblemInterface
from srsi.core.models import PairIndex, RunConfig
from srsi.inputs.dirichlet import observation_set_from_counts
from srsi.services.procedure_service import SrsiProcedure, initial_design, run_nmc, run_srsi
from srsi.writers.checkpoint_writer import load_checkpoint

GP_SETTINGS = {'mle_restarts': 1}


class StubQuadraticProblem(SimulationProblemInterface):
    """Four solutions on a line; mean (x - 2)^2 + 2 w0 with Gaussian noise."""

    name = 'quadratic'

    def __init__(self, noise=0.2, fail_after=None):
        self.noise = noise
        self.fail_after = fail_after
        self.calls = 0
        self._data = [observation_set_from_counts([0.0, 1.0, 2.0], [4, 3, 5])]

    @property
    def solutions(self):
        return np.arange(4.0)[:, None]

    @property
    def data(self):
        return self._data

    def simulate(self, solution_index, model, rng):
        self.calls += 1
        if self.fail_after is not None and self.calls > self.fail_after:
            raise RuntimeError("solver diverged")
        return self.true_mean(solution_index, model) + rng.normal(0.0, self.noise)

    @property
    def has_oracle(self):
        return True

    def true_mean(self, solution_index, model):
        return (solution_index - 2.0) ** 2 + 2.0 * float(model[0].weights[0])


def make_config(**overrides):
    settings = dict(B=4, n0=8, r=3, replications=[2], alpha=0.3, delta=0.1, xhat=2,
                    xhat_replications=5, budget=60, seed=1, kappa=1.0)
    settings.update(overrides)
    return RunConfig(**settings)


def test_initial_design_is_stratified():
    design = initial_design(4, 6, 10, np.random.default_rng(0))

    per_solution = np.bincount([p.solution_index for p in design], minlength=4)
    assert len(design) == 10
    assert sorted(per_solution.tolist()) == [2, 2, 3, 3]
    for x in range(4):
        models = [p.model_index for p in design if p.solution_index == x]
        assert len(set(models)) == len(models)


def test_design_budget_only_runs_no_iterations():
    result = SrsiProcedure(GP_SETTINGS).run(make_config(budget=24), StubQuadraticProblem())

    assert result.success
    assert result.iterations == 0
    assert result.trace == []
    assert result.replications_used == 24
    assert result.frequency.sum() == 24
    assert not result.estimate.included[2]


def test_budget_accounting():
    config = make_config(budget=40)
    result = SrsiProcedure(GP_SETTINGS).run(config, StubQuadraticProblem())

    assert result.replications_used >= 40
    assert result.replications_used < 40 + 4
    assert result.replications_used == 24 + sum(t.replications for t in result.trace)
    assert result.log.total_replications == result.replications_used
    assert result.frequency.sum() == result.replications_used
    assert result.iterations == len(result.trace)


def test_iteration_limit_without_budget():
    result = SrsiProcedure(GP_SETTINGS).run(make_config(budget=None, max_iterations=3), StubQuadraticProblem())

    assert result.iterations == 3
    assert [t.iteration for t in result.trace] == [1, 2, 3]


def test_run_is_deterministic_for_a_seed():
    first = run_srsi(make_config(), StubQuadraticProblem(), gp_config=GP_SETTINGS)
    second = run_srsi(make_config(), StubQuadraticProblem(), gp_config=GP_SETTINGS)

    assert [t.to_dict() for t in first.trace] == [t.to_dict() for t in second.trace]
    assert first.estimate.members == second.estimate.members
    assert np.allclose(first.state.mu, second.state.mu)


def test_variants_share_models_design_and_hyperparameters():
    procedure = SrsiProcedure(GP_SETTINGS)
    srsi = procedure.run(make_config(variant='srsi'), StubQuadraticProblem())
    ablation = procedure.run(make_config(variant='srsi-v'), StubQuadraticProblem())

    for a, b in zip(srsi.models, ablation.models):
        assert np.array_equal(a[0].weights, b[0].weights)
    assert srsi.state.params.tau_sq == pytest.approx(ablation.state.params.tau_sq)
    assert srsi.state.beta0 == pytest.approx(ablation.state.beta0)
    assert srsi.xhat == ablation.xhat


def test_parallel_replications_match_serial():
    problem = StubQuadraticProblem()
    models = SrsiProcedure(GP_SETTINGS).candidate_models(make_config(), problem)

    serial = SrsiProcedure(GP_SETTINGS).simulate_batch(problem, models, 1, PairIndex(1, 2), 6)
    with parallel_config(backend='threading'):
        parallel = SrsiProcedure(GP_SETTINGS, workers=2).simulate_batch(problem, models, 1, PairIndex(1, 2), 6)

    assert np.array_equal(serial, parallel)


def test_map_optimum_xhat():
    procedure = SrsiProcedure(GP_SETTINGS)
    assert procedure.select_xhat(make_config(xhat='map-optimum'), StubQuadraticProblem()) == 2


def test_xhat_index_out_of_range():
    with pytest.raises(ValidationError):
        SrsiProcedure(GP_SETTINGS).select_xhat(make_config(xhat=7), StubQuadraticProblem())


def test_budget_below_design_cost_rejected():
    with pytest.raises(ValidationError):
        SrsiProcedure(GP_SETTINGS).run(make_config(budget=20), StubQuadraticProblem())


def test_alpha_on_grid_warns():
    result = SrsiProcedure(GP_SETTINGS).run(make_config(alpha=0.25, budget=24), StubQuadraticProblem())

    assert any('alpha * B' in warning for warning in result.warnings)


def test_nmc_with_two_replications_per_pair():
    result = run_nmc(make_config(variant='nmc', budget=32), StubQuadraticProblem())

    assert result.replications_used == 32
    assert result.frequency.tolist() == [8, 8, 8, 8]
    assert all(record.count == 2 for record in result.log.records.values())
    assert result.state is None


def test_nmc_rejects_budget_below_two_per_pair():
    with pytest.raises(ValidationError):
        run_nmc(make_config(variant='nmc', budget=31), StubQuadraticProblem())


def test_failed_replication_saves_checkpoint(tmp_path, mocker):
    problem = StubQuadraticProblem(fail_after=24)
    procedure = SrsiProcedure(GP_SETTINGS, checkpoint_dir=tmp_path)
    save_failure = mocker.spy(procedure, '_save_failure')

    with pytest.raises(SimulationError) as excinfo:
        procedure.run(make_config(), problem)

    error = excinfo.value
    save_failure.assert_called_once()
    assert save_failure.call_args.args[0] is error
    assert error.problem == 'quadratic'
    assert error.pair is not None
    assert Path(error.checkpoint_path).exists()
    state, log, header = load_checkpoint(error.checkpoint_path)
    assert log.total_replications == 24
    assert header['xhat'] == 2
    assert header['variant'] == 'srsi'


def test_failed_design_replication_leaves_no_checkpoint(tmp_path, mocker):
    simulate_batch = mocker.patch.object(
        SrsiProcedure, 'simulate_batch',
        side_effect=SimulationError("solver diverged", 'quadratic', (0, 0)),
    )
    procedure = SrsiProcedure(GP_SETTINGS, checkpoint_dir=tmp_path)

    with pytest.raises(SimulationError) as excinfo:
        procedure.run(make_config(), StubQuadraticProblem())

    simulate_batch.assert_called_once()
    assert excinfo.value.pair == (0, 0)
    assert excinfo.value.checkpoint_path is None
    assert list(tmp_path.glob('*.srsi')) == []


def test_refine_over_new_models():
    procedure = SrsiProcedure(GP_SETTINGS)
    problem = StubQuadraticProblem()
    result = procedure.run(make_config(), problem)

    refined = procedure.refine(result, problem, 6)

    assert len(refined.included) == 4
    assert not refined.included[result.xhat]
    assert refined.alpha == 0.3
