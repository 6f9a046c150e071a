"""
Run directories and benchmark tables.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import yaml

from ..core.models import RiskSetEstimate, RunResult, TraceRecord
from .checkpoint_writer import save_checkpoint

logger = logging.getLogger(__name__)

TRACE_FIELDS = ['iteration', 'solution', 'model', 'mode', 'criterion', 'set_size', 'replications']
METRIC_FIELDS = ['variant', 'budget', 'inclusion', 'identification', 'misclassification', 'runs']


def run_directory_name(result: RunResult, budget: Optional[int] = None) -> str:
    name = f"{result.variant}_seed{result.seed}"
    return f"{name}_budget{budget}" if budget is not None else name


def _write_rows(path: Path, fields: List[str], rows: Iterable[Dict[str, Any]]) -> Path:
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def difference_rows(result: RunResult) -> List[Dict[str, Any]]:
    """mu(xhat, b) - mu(x, b) per pair; sample means for runs without a posterior."""
    if result.state is not None:
        means = result.state.mean_grid()
    elif result.log is not None and result.log.records:
        pairs, sample_means, _, _ = result.log.arrays()
        means = np.full((pairs[:, 0].max() + 1, pairs[:, 1].max() + 1), np.nan)
        means[pairs[:, 0], pairs[:, 1]] = sample_means
    else:
        return []
    differences = means[result.xhat][None, :] - means
    return [
        {'solution': x, 'model': b, 'difference': float(differences[x, b])}
        for x in range(differences.shape[0]) for b in range(differences.shape[1])
    ]


def write_run_directory(result: RunResult, directory: Path, config_snapshot: Dict[str, Any],
                        checkpoint_name: str = 'checkpoint.srsi') -> Path:
    """
    Persist a run: config snapshot, trace, final set, frequency histogram,
    differences and the GP checkpoint.

    Args:
        result: Finished run
        directory: Run directory (created)
        config_snapshot: Merged settings to reproduce the run
        checkpoint_name: File name of the checkpoint inside the directory

    Returns:
        The run directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    snapshot = dict(config_snapshot)
    snapshot['result'] = {
        'variant': result.variant, 'seed': int(result.seed), 'xhat': int(result.xhat),
        'iterations': int(result.iterations), 'replications_used': int(result.replications_used),
    }
    (directory / 'config.yaml').write_text(
        yaml.safe_dump(snapshot, sort_keys=True, default_flow_style=False), encoding='utf-8')

    _write_rows(directory / 'trace.csv', TRACE_FIELDS, (record.to_dict() for record in result.trace))

    if result.estimate is not None:
        with open(directory / 'risk_set.json', 'w', encoding='utf-8') as handle:
            json.dump(result.estimate.to_dict(), handle, indent=2, sort_keys=True)
        _write_rows(directory / 'risk_set.csv', ['solution', 'prob', 'included'],
                    result.estimate.to_dict()['solutions'])

    frequency = result.frequency if result.frequency is not None else []
    _write_rows(directory / 'frequency.csv', ['solution', 'replications'],
                ({'solution': x, 'replications': int(n)} for x, n in enumerate(frequency)))
    _write_rows(directory / 'differences.csv', ['solution', 'model', 'difference'], difference_rows(result))

    if result.state is not None and result.log is not None:
        extra = {'seed': int(result.seed), 'variant': result.variant}
        if result.estimate is not None:
            extra.update({'alpha': float(result.estimate.alpha), 'delta': float(result.estimate.delta)})
        extra['noise_floor'] = float(config_snapshot.get('gp', {}).get('noise_floor', 0.0))
        path = save_checkpoint(directory / checkpoint_name, result.state, result.log, result.xhat, extra)
        result.checkpoint_path = str(path)

    logger.info(f"Run written to {directory}")
    return directory


def read_risk_set(path: Path) -> RiskSetEstimate:
    with open(path, 'r', encoding='utf-8') as handle:
        return RiskSetEstimate.from_dict(json.load(handle))


def read_trace(path: Path) -> List[TraceRecord]:
    with open(path, 'r', newline='', encoding='utf-8') as handle:
        return [
            TraceRecord(
                iteration=int(row['iteration']), solution=int(row['solution']), model=int(row['model']),
                mode=row['mode'], criterion=float(row['criterion']), set_size=int(row['set_size']),
                replications=int(row['replications']),
            )
            for row in csv.DictReader(handle)
        ]


def write_metrics(rows: List[Dict[str, Any]], path: Path) -> Path:
    """Benchmark metric curves, one row per (variant, budget)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_rows(path, METRIC_FIELDS, rows)
    logger.info(f"Metrics written to {path}")
    return path


def reclassify_rows(grid: Dict[Tuple[float, float], RiskSetEstimate]) -> List[Dict[str, Any]]:
    rows = []
    for (alpha, delta), estimate in sorted(grid.items(), key=lambda item: (item[0][1], item[0][0])):
        rows.append({
            'delta': delta, 'alpha': alpha, 'size': len(estimate),
            'members': ' '.join(str(m) for m in estimate.members),
        })
    return rows


def write_reclassify_table(grid: Dict[Tuple[float, float], RiskSetEstimate], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return _write_rows(path, ['delta', 'alpha', 'size', 'members'], reclassify_rows(grid))


def format_reclassify_table(grid: Dict[Tuple[float, float], RiskSetEstimate],
                            labels: Optional[List[str]] = None) -> str:
    """Text table with one line per (delta, alpha) and the set members."""
    lines = [f"{'delta':>6} {'alpha':>6} {'size':>5}  members"]
    for row in reclassify_rows(grid):
        members = row['members'].split()
        if labels is not None:
            members = [labels[int(m)] for m in members]
        lines.append(f"{row['delta']:>6g} {row['alpha']:>6g} {row['size']:>5}  {{{', '.join(members)}}}")
    return '\n'.join(lines)


def format_summary(result: RunResult, labels: Optional[List[str]] = None) -> str:
    """Set membership and estimated probabilities of one run."""
    estimate = result.estimate
    label = (lambda i: labels[i]) if labels is not None else str
    lines = [
        f"variant={result.variant} seed={result.seed} xhat={label(result.xhat)} "
        f"iterations={result.iterations} replications={result.replications_used}",
    ]
    if estimate is None:
        return lines[0]
    lines.append(f"risk set (alpha={estimate.alpha:g}, delta={estimate.delta:g}): "
                 f"{{{', '.join(label(m) for m in estimate.members)}}}")
    lines.append(f"{'solution':>10} {'prob':>8}  in")
    for x, (p, included) in enumerate(zip(estimate.prob_estimate, estimate.included)):
        lines.append(f"{label(x):>10} {p:>8.4f}  {'*' if included else ''}")
    return '\n'.join(lines)
