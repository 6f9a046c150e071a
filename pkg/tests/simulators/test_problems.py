import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SRSI_ROOT = PROJECT_ROOT / "features" / "input-risk"
if str(SRSI_ROOT) not in sys.path:
    sys.path.insert(0, str(SRSI_ROOT))

from srsi.core.exceptions import ConfigurationError, DataFileError, ValidationError
from srsi.core.models import AmbulanceConfig, JointInputModel, Mm1kConfig, ProbabilitySimplex
from srsi.inputs.dirichlet import observation_set_from_counts, observation_set_from_values
from srsi.simulators.data_generation import (
    default_frequency_map, generate_real_world_data, load_frequency_map,
)
from srsi.simulators.mm1k import mm1k_analytic_cost
from srsi.simulators.problems import AmbulanceProblem, Mm1kProblem, build_problem


def test_default_frequency_map_totals_and_anchors():
    counts = default_frequency_map()

    assert counts.shape == (36,)
    assert counts.sum() == 331
    assert counts[29] == 40
    assert counts[5] == counts[10] == counts[14] == 1
    assert np.array_equal(counts, default_frequency_map())


def test_frequency_map_file_formats(tmp_path):
    plain = tmp_path / "plain.csv"
    plain.write_text("count\n" + "\n".join(["2"] * 36) + "\n")
    indexed = tmp_path / "indexed.csv"
    indexed.write_text("neighborhood,count\n1,5\n36,7\n")

    assert load_frequency_map(plain).sum() == 72
    counts = load_frequency_map(indexed)
    assert counts[0] == 5 and counts[35] == 7 and counts.sum() == 12


def test_frequency_map_rejects_out_of_range(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("37,4\n")

    with pytest.raises(DataFileError) as excinfo:
        load_frequency_map(path)
    assert excinfo.value.line_number == 1


def test_generated_data_is_reproducible():
    first = generate_real_world_data('mm1k', 50, seed=4)
    second = generate_real_world_data('mm1k', 50, seed=4)
    other = generate_real_world_data('mm1k', 50, seed=5)

    assert len(first) == 2
    assert [d.sample_size for d in first] == [50, 50]
    assert np.array_equal(first[1].raw_observations, second[1].raw_observations)
    assert not np.array_equal(first[0].raw_observations, other[0].raw_observations)


def test_generated_ambulance_locations_are_neighborhoods():
    data = generate_real_world_data('ambulance', 331, seed=1)

    assert len(data) == 1
    support = data[0].distinct_support[:, 0]
    assert np.all((support >= 0) & (support < 36))
    assert data[0].sample_size == 331


def test_unknown_problem_rejected(tmp_path):
    path = tmp_path / "demand.txt"
    path.write_text("1.0\n2.0\n")

    with pytest.raises(ValidationError):
        generate_real_world_data('inventory', 10, seed=1)
    with pytest.raises(ConfigurationError):
        build_problem('inventory', Mm1kConfig(), 1, 10, data_files=[path])


def test_mm1k_problem_oracle_and_labels():
    data = [observation_set_from_values([0.5, 1.5]), observation_set_from_values([0.4, 1.2], 1)]
    problem = Mm1kProblem(Mm1kConfig(capacities=[1, 2, 3]), data)
    model = JointInputModel((ProbabilitySimplex(np.array([0.5, 0.5])), ProbabilitySimplex(np.array([0.5, 0.5]))))

    assert problem.solutions.shape == (3, 1)
    assert problem.solution_labels() == ['k=1', 'k=2', 'k=3']
    assert problem.support(1)[:, 0].tolist() == [0.4, 1.2]
    assert problem.has_oracle
    assert problem.means(model) == pytest.approx((1.0, 0.8))
    assert problem.true_mean(1, model) == pytest.approx(mm1k_analytic_cost(2, 1.0, 0.8))
    assert [p.tolist() for p in problem.parameters(model)] == pytest.approx([[1.0], [0.8]])


def test_mm1k_problem_requires_two_sources():
    with pytest.raises(ConfigurationError):
        Mm1kProblem(Mm1kConfig(), [observation_set_from_values([1.0, 2.0])])


def test_ambulance_problem_spreads_weights_on_grid():
    data = [observation_set_from_counts([3.0, 29.0], [1, 3])]
    problem = AmbulanceProblem(AmbulanceConfig(), data)
    model = JointInputModel((ProbabilitySimplex(np.array([0.25, 0.75])),))

    simplex = problem.grid_simplex(model)

    assert len(simplex) == 36
    assert simplex.weights[3] == pytest.approx(0.25)
    assert simplex.weights[29] == pytest.approx(0.75)
    assert problem.solution_labels()[0] == '1'
    assert not problem.has_oracle
    assert problem.parameters(model)[0] == pytest.approx(0.25 * np.array([0.0, 3.0]) + 0.75 * np.array([4.0, 5.0]))


def test_ambulance_problem_rejects_locations_off_grid():
    with pytest.raises(ConfigurationError):
        AmbulanceProblem(AmbulanceConfig(), [observation_set_from_counts([40.0], [2])])


def test_build_problem_from_data_files(tmp_path):
    interarrival = tmp_path / "interarrival.txt"
    service = tmp_path / "service.txt"
    interarrival.write_text("1.0\n0.5\n2.0\n")
    service.write_text("0.9\n1.1\n")

    problem = build_problem('mm1k', Mm1kConfig(capacities=[1, 2]), 1, 100, [interarrival, service])

    assert isinstance(problem, Mm1kProblem)
    assert [d.sample_size for d in problem.data] == [3, 2]
