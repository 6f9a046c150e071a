"""
Experiment spec loading and validation.

Specs are YAML documents merged over the defaults in ``settings``. Every
numeric bound and referenced file is checked before any simulation runs.
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from ..core.exceptions import ConfigurationError, ValidationError
from ..core.models import AmbulanceConfig, Mm1kConfig, RunConfig
from .settings import AMBULANCE_RUN_CONFIG, PROBLEMS, RUN_CONFIG, get_config

logger = logging.getLogger(__name__)


@dataclass
class ExperimentSpec:
    """A validated experiment: problem, run settings, and output plumbing."""
    problem_name: str
    problem_config: Any
    run: RunConfig
    gp: Dict[str, Any]
    acquisition: Dict[str, Any]
    variants: List[str]
    seeds: List[int]
    budgets: List[int]
    workers: int
    output_dir: Path
    alphas: List[float]
    deltas: List[float]
    data_files: Optional[List[Path]] = None
    source_path: Optional[Path] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    def to_yaml(self) -> str:
        """Serialize the merged settings for the run directory snapshot."""
        return yaml.safe_dump(self.raw, sort_keys=True, default_flow_style=False)


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any], path: str = "") -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        key_path = f"{path}.{key}" if path else key
        if key not in merged:
            raise ConfigurationError(f"Unknown setting: {key_path}", key=key_path)
        if isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = _deep_merge(merged[key], value, key_path)
        else:
            merged[key] = value
    return merged


def _key_lines(text: str) -> Dict[str, int]:
    """Map dotted key paths to 1-based source lines."""
    lines: Dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key_path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                lines[key_path] = key_node.start_mark.line + 1
                walk(value_node, key_path)

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, "")
    return lines


def parse_spec_text(text: str, source_path: Optional[Path] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> ExperimentSpec:
    """
    Parse and validate an experiment spec.

    Args:
        text: YAML document
        source_path: File the text came from; relative data paths resolve against it
        overrides: Dotted-key overrides applied after the document (CLI flags)

    Returns:
        Validated ExperimentSpec

    Raises:
        ConfigurationError: On YAML syntax errors, unknown keys, bad values, or missing files
    """
    try:
        document = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, 'problem', None) or str(e)
        raise ConfigurationError(f"Invalid YAML at line {line}: {problem}", line=line)
    if not isinstance(document, dict):
        raise ConfigurationError("Spec must be a mapping at the top level", line=1)

    key_lines = _key_lines(text)
    defaults = get_config()
    problem_name = (document.get('problem') or {}).get('name', defaults['problem']['name'])
    if problem_name == 'ambulance':
        defaults['run'] = dict(AMBULANCE_RUN_CONFIG)

    try:
        merged = _deep_merge(defaults, document)
        for dotted, value in (overrides or {}).items():
            section, _, key = dotted.partition('.')
            merged[section][key] = value
        return _build_spec(merged, source_path)
    except ConfigurationError as e:
        if e.line is None and e.key in key_lines:
            e.line = key_lines[e.key]
            e.message = f"line {e.line}: {e.message}"
            e.args = (e.message,)
        raise


def load_experiment_spec(path: Path, overrides: Optional[Dict[str, Any]] = None) -> ExperimentSpec:
    """Load an experiment spec file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Spec file not found: {path}", key=str(path))
    logger.info(f"Loading experiment spec: {path}")
    return parse_spec_text(path.read_text(encoding='utf-8'), path, overrides)


def _build_spec(merged: Dict[str, Any], source_path: Optional[Path]) -> ExperimentSpec:
    problem = merged['problem']
    name = problem['name']
    if name not in PROBLEMS:
        raise ConfigurationError(f"Unknown problem: {name}", key='problem.name')

    base_dir = source_path.parent if source_path else Path.cwd()
    problem_config = _build_problem_config(name, problem[name], base_dir)

    data_files = None
    if problem.get('data_files'):
        data_files = []
        for entry in problem['data_files']:
            data_path = Path(entry)
            if not data_path.is_absolute():
                data_path = base_dir / data_path
            if not data_path.exists():
                raise ConfigurationError(f"Data file not found: {data_path}", key='problem.data_files')
            data_files.append(data_path)

    run_values = dict(merged['run'])
    unknown = set(run_values) - set(RUN_CONFIG)
    if unknown:
        raise ConfigurationError(f"Unknown run setting: {sorted(unknown)[0]}", key=f"run.{sorted(unknown)[0]}")
    if isinstance(run_values.get('replications'), int):
        run_values['replications'] = [run_values['replications']]
    try:
        run = RunConfig(**run_values)
    except ValidationError as e:
        raise ConfigurationError(e.message, key=f"run.{e.field_name}")
    except TypeError as e:
        raise ConfigurationError(f"Invalid run settings: {e}", key='run')

    gp = merged['gp']
    if gp['divergence'] not in ('total_variation', 'sq_hellinger', 'jensen_shannon'):
        raise ConfigurationError(f"Unknown divergence: {gp['divergence']}", key='gp.divergence')
    if int(gp['mle_restarts']) < 1:
        raise ConfigurationError("mle_restarts must be >= 1", key='gp.mle_restarts')
    if int(gp['refresh_interval']) < 1:
        raise ConfigurationError("refresh_interval must be >= 1", key='gp.refresh_interval')

    benchmark = merged['benchmark']
    variants = list(benchmark['variants'])
    for variant in variants:
        if variant not in ('srsi', 'srsi-m', 'srsi-v', 'nmc'):
            raise ConfigurationError(f"Unknown variant: {variant}", key='benchmark.variants')
    seeds = benchmark['seeds']
    if isinstance(seeds, int):
        seeds = [seeds]
    elif len(seeds) == 2 and seeds[0] <= seeds[1]:
        seeds = list(range(int(seeds[0]), int(seeds[1]) + 1))
    budgets = [int(b) for b in benchmark['budgets']]
    if any(b < 1 for b in budgets):
        raise ConfigurationError("budgets must be positive", key='benchmark.budgets')
    workers = int(benchmark['workers'])
    if workers < 1:
        raise ConfigurationError("workers must be >= 1", key='benchmark.workers')

    output = merged['output']
    alphas = [float(a) for a in output['alphas']]
    deltas = [float(d) for d in output['deltas']]
    if any(not 0 < a < 1 for a in alphas):
        raise ConfigurationError("every alpha must lie in (0, 1)", key='output.alphas')
    if any(d < 0 for d in deltas):
        raise ConfigurationError("every delta must be >= 0", key='output.deltas')

    return ExperimentSpec(
        problem_name=name,
        problem_config=problem_config,
        run=run,
        gp=gp,
        acquisition=merged['acquisition'],
        variants=variants,
        seeds=[int(s) for s in seeds],
        budgets=budgets,
        workers=workers,
        output_dir=Path(output['directory']),
        alphas=alphas,
        deltas=deltas,
        data_files=data_files,
        source_path=source_path,
        raw=merged,
    )


def _build_problem_config(name: str, values: Dict[str, Any], base_dir: Path):
    values = dict(values)
    try:
        if name == 'mm1k':
            capacities = values.get('capacities', [1, 50])
            if len(capacities) == 2 and capacities[0] <= capacities[1]:
                values['capacities'] = list(range(int(capacities[0]), int(capacities[1]) + 1))
            return Mm1kConfig(**values)
        frequency_map = values.get('frequency_map')
        if frequency_map:
            map_path = Path(frequency_map)
            if not map_path.is_absolute():
                map_path = base_dir / map_path
            if not map_path.exists():
                raise ConfigurationError(f"Frequency map not found: {map_path}",
                                         key='problem.ambulance.frequency_map')
            values['frequency_map'] = str(map_path)
        return AmbulanceConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(e.message, key=f"problem.{name}.{e.field_name}")
