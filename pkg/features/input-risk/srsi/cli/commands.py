"""
Command-line interface for risk set inference experiments.

Subcommands:
    run          Run the configured variant and write a run directory
    benchmark    Macro-runs over seeds, variants and budgets; writes metrics.csv
    reclassify   Risk sets over alpha/delta grids from a saved checkpoint
    simulate     Raw replications at one (solution, model) pair
    gen-data     Write a synthetic real-world dataset

Exit codes: 0 ok, 1 runtime failure, 2 configuration error.
"""

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from joblib import Parallel, delayed

from ..config.loader import ExperimentSpec, load_experiment_spec
from ..config.settings import OUTPUT_CONFIG, get_config
from ..core.exceptions import (
    ConfigurationError, DataFileError, SimulationError, SrsiError, ValidationError,
)
from ..core.models import AmbulanceConfig, Mm1kConfig
from ..core.streams import stream
from ..inputs.data_loader import write_counts, write_observations
from ..inputs.dirichlet import map_joint
from ..services.evaluation_service import EvaluationService
from ..services.procedure_service import SrsiProcedure
from ..services.riskset_service import reclassify
from ..simulators.data_generation import generate_real_world_data
from ..simulators.problems import build_problem
from ..writers.checkpoint_writer import load_checkpoint
from ..writers.result_writer import (
    format_reclassify_table, format_summary, run_directory_name, write_metrics,
    write_reclassify_table, write_run_directory,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2
LOG_FORMAT = '%(asctime)s - [SRSI] - %(levelname)s - %(message)s'


def setup_logging(verbose: bool = False, log_file: Optional[str] = None):
    """Configure root logging: stderr always, plus an optional log file."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format=LOG_FORMAT, handlers=handlers, force=True)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {}
    if getattr(args, 'seed', None) is not None:
        overrides['run.seed'] = args.seed
    if getattr(args, 'budget_override', None) is not None:
        overrides['run.budget'] = args.budget_override
    if getattr(args, 'workers', None) is not None:
        overrides['benchmark.workers'] = args.workers
    if getattr(args, 'out', None) is not None:
        overrides['output.directory'] = str(args.out)
    return overrides


def _problem_for(spec: ExperimentSpec, seed: int):
    return build_problem(spec.problem_name, spec.problem_config, seed,
                         spec.run.sample_size, spec.data_files)


def _procedure(spec: ExperimentSpec, workers: int = 1, checkpoint_dir: Optional[Path] = None) -> SrsiProcedure:
    return SrsiProcedure(spec.gp, spec.acquisition, workers=workers, checkpoint_dir=checkpoint_dir)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    """Execute the configured run and write its directory."""
    spec = load_experiment_spec(Path(args.spec), _overrides(args))
    config = spec.run
    problem = _problem_for(spec, config.seed)
    procedure = _procedure(spec, spec.workers, spec.output_dir)
    result = procedure.run(config, problem)

    directory = spec.output_dir / run_directory_name(result)
    write_run_directory(result, directory, spec.raw, OUTPUT_CONFIG['checkpoint_name'])

    labels = problem.solution_labels()
    print(format_summary(result, labels))
    if problem.has_oracle and result.models:
        oracle = EvaluationService().oracle_for(result, problem)
        print(f"oracle set: {{{', '.join(labels[m] for m in oracle.members)}}}")
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"results written to {directory}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------

def _benchmark_seed(spec: ExperimentSpec, seed: int) -> List[Dict[str, Any]]:
    problem = _problem_for(spec, seed)
    procedure = _procedure(spec)
    evaluation = EvaluationService()
    oracle = None
    runs = []
    for budget in spec.budgets:
        for variant in spec.variants:
            config = dataclasses.replace(spec.run, seed=seed, variant=variant, budget=budget,
                                         max_iterations=None)
            try:
                result = procedure.run(config, problem)
            except ValidationError as e:
                logger.warning(f"Skipping {variant} at budget {budget}: {e}")
                continue
            if oracle is None:
                oracle = evaluation.oracle_for(result, problem)
            runs.append({
                'variant': variant, 'budget': budget, 'seed': seed, 'oracle': oracle,
                'result': dataclasses.replace(result, state=None, log=None, models=[]),
            })
    return runs


def cmd_benchmark(args: argparse.Namespace) -> int:
    """Macro-runs across seeds, variants and budgets; writes metrics.csv and runs.csv."""
    overrides = _overrides(args)
    budget = overrides.pop('run.budget', None)
    spec = load_experiment_spec(Path(args.spec), overrides)
    if budget is not None:
        spec.budgets = [int(budget)]
    if args.seed is not None:
        spec.seeds = [args.seed]

    probe = _problem_for(spec, spec.seeds[0])
    if not probe.has_oracle:
        raise ConfigurationError(f"benchmark needs a problem with an analytic oracle, got {spec.problem_name}",
                                 key='problem.name')
    logger.info(f"Benchmark: {len(spec.seeds)} seeds x {len(spec.variants)} variants x "
                f"{len(spec.budgets)} budgets on {spec.workers} workers")

    if spec.workers > 1:
        batches = Parallel(n_jobs=spec.workers)(delayed(_benchmark_seed)(spec, seed) for seed in spec.seeds)
    else:
        batches = [_benchmark_seed(spec, seed) for seed in spec.seeds]
    runs = [run for batch in batches for run in batch]

    rows = EvaluationService().curves(runs)
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    write_metrics(rows, spec.output_dir / 'metrics.csv')
    with open(spec.output_dir / 'runs.csv', 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['variant', 'budget', 'seed', 'xhat', 'estimate', 'oracle', 'replications'])
        for run in sorted(runs, key=lambda r: (r['variant'], r['budget'], r['seed'])):
            result = run['result']
            writer.writerow([run['variant'], run['budget'], run['seed'], result.xhat,
                             ' '.join(map(str, result.estimate.members)),
                             ' '.join(map(str, run['oracle'].members)), result.replications_used])

    print(f"{'variant':>8} {'budget':>7} {'incl':>6} {'ident':>6} {'miscl':>7} {'runs':>5}")
    for row in rows:
        print(f"{row['variant']:>8} {row['budget']:>7} {row['inclusion']:>6.3f} "
              f"{row['identification']:>6.3f} {row['misclassification']:>7.3f} {row['runs']:>5}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# reclassify
# ---------------------------------------------------------------------------

def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def cmd_reclassify(args: argparse.Namespace) -> int:
    """Risk sets for every (alpha, delta) from one saved posterior."""
    state, _, header = load_checkpoint(Path(args.checkpoint))
    alphas = args.alphas or OUTPUT_CONFIG['alphas']
    deltas = args.deltas or OUTPUT_CONFIG['deltas']
    for alpha in alphas:
        if not 0 < alpha < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}", key='alphas')
    grid = reclassify(state, int(header['xhat']), alphas, deltas)
    print(f"xhat={header['xhat']}")
    print(format_reclassify_table(grid))
    if args.out:
        write_reclassify_table(grid, Path(args.out))
        print(f"table written to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / gen-data
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    """Print raw replications at one (solution, model) pair."""
    spec = load_experiment_spec(Path(args.spec), _overrides(args))
    seed = spec.run.seed
    problem = _problem_for(spec, seed)
    if not 0 <= args.solution < problem.n_solutions:
        raise ConfigurationError(f"solution must lie in [0, {problem.n_solutions})", key='solution')

    procedure = _procedure(spec)
    if args.model == 'map':
        model = map_joint(procedure.posteriors(spec.run, problem))
        model_key = spec.run.B
    else:
        model_key = int(args.model)
        if not 0 <= model_key < spec.run.B:
            raise ConfigurationError(f"model must be 'map' or an index in [0, {spec.run.B})", key='model')
        model = procedure.candidate_models(spec.run, problem)[model_key]

    outputs = [problem.simulate(args.solution, model, stream(seed, 'simulate', args.solution, model_key, i))
               for i in range(args.replications)]
    for i, value in enumerate(outputs):
        print(f"{i}\t{value!r}")
    mean = sum(outputs) / len(outputs)
    print(f"mean\t{mean!r}", file=sys.stderr)
    return EXIT_OK


def cmd_gen_data(args: argparse.Namespace) -> int:
    """Write a synthetic real-world dataset, one file per input source."""
    if args.spec:
        spec = load_experiment_spec(Path(args.spec), _overrides(args))
        name, problem_config, seed, size = spec.problem_name, spec.problem_config, spec.run.seed, spec.run.sample_size
    else:
        name = args.problem
        defaults = get_config()['problem'][name]
        if name == 'mm1k':
            defaults['capacities'] = list(range(defaults['capacities'][0], defaults['capacities'][1] + 1))
            problem_config = Mm1kConfig(**defaults)
        else:
            problem_config = AmbulanceConfig(**defaults)
        seed = args.seed if args.seed is not None else 1
        size = problem_config.calls if name == 'ambulance' else get_config()['run']['sample_size']
    if args.size is not None:
        size = args.size

    out = Path(args.out or '.')
    out.mkdir(parents=True, exist_ok=True)
    data = generate_real_world_data(name, size, seed, problem_config)
    if name == 'ambulance':
        paths = [write_counts(out / 'calls.csv', data[0])]
    else:
        paths = [write_observations(out / 'interarrival.txt', data[0]),
                 write_observations(out / 'service.txt', data[1])]
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='srsi', description='Sequential risk set inference experiments')
    parser.add_argument('--verbose', '-v', action='store_true', help='debug logging')
    parser.add_argument('--log-file', help='also write the log to this file')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p, spec=True):
        if spec:
            p.add_argument('spec', help='experiment spec (YAML)')
        p.add_argument('--seed', type=int, help='override the run seed')
        p.add_argument('--out', help='output directory')
        p.add_argument('--workers', type=int, help='parallel workers')
        p.add_argument('--budget-override', type=int, help='override the replication budget')

    common(sub.add_parser('run', help='run the configured variant'))
    common(sub.add_parser('benchmark', help='macro-runs over seeds, variants and budgets'))

    p = sub.add_parser('reclassify', help='risk sets over alpha/delta grids from a checkpoint')
    p.add_argument('checkpoint')
    p.add_argument('--alphas', type=_float_list, help='comma-separated alpha grid')
    p.add_argument('--deltas', type=_float_list, help='comma-separated delta grid')
    p.add_argument('--out', help='write the table as CSV')

    p = sub.add_parser('simulate', help='raw replications at one pair')
    common(p)
    p.add_argument('--solution', type=int, required=True, help='solution index')
    p.add_argument('--model', default='map', help="'map' or a candidate model index")
    p.add_argument('--replications', type=int, default=10)

    p = sub.add_parser('gen-data', help='write a synthetic real-world dataset')
    common(p, spec=False)
    p.add_argument('--spec', help='experiment spec supplying problem settings')
    p.add_argument('--problem', choices=['mm1k', 'ambulance'], default='mm1k')
    p.add_argument('--size', type=int, help='observations per source')
    return parser


COMMANDS = {
    'run': cmd_run,
    'benchmark': cmd_benchmark,
    'reclassify': cmd_reclassify,
    'simulate': cmd_simulate,
    'gen-data': cmd_gen_data,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.log_file)

    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, DataFileError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as e:
        logger.error(f"Simulation failed: {e}")
        if e.checkpoint_path:
            print(f"posterior saved to {e.checkpoint_path}", file=sys.stderr)
        return EXIT_FAILURE
    except SrsiError as e:
        logger.error(f"Run failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
