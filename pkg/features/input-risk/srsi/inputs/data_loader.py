"""
Plain-text ingestion of real-world input data.

Observation files hold one observation per line: a scalar, or a
comma-separated vector. Counts files hold ``value,count`` lines, where the
value may itself be several comma-separated components. Blank lines and
lines starting with ``#`` are ignored.
"""

import logging
from pathlib import Path
from typing import List

import numpy as np

from ..core.exceptions import DataFileError
from ..core.models import ObservationSet
from .dirichlet import observation_set_from_counts, observation_set_from_values

logger = logging.getLogger(__name__)


def _data_lines(path: Path):
    path = Path(path)
    if not path.exists():
        raise DataFileError(f"Data file not found: {path}", str(path))
    with open(path, 'r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, 1):
            text = line.strip()
            if text and not text.startswith('#'):
                yield line_number, text


def load_observations(path: Path, source_index: int = 0) -> ObservationSet:
    """
    Read one observation per line.

    Args:
        path: Observation file
        source_index: Input source the file describes

    Returns:
        ObservationSet aggregated on distinct values

    Raises:
        DataFileError: Missing file, unparseable line, or ragged vectors
    """
    rows: List[List[float]] = []
    for line_number, text in _data_lines(path):
        try:
            row = [float(part) for part in text.split(',')]
        except ValueError:
            raise DataFileError(f"Cannot parse observation: {text!r}", str(path), line_number)
        if rows and len(row) != len(rows[0]):
            raise DataFileError(
                f"Expected {len(rows[0])} components, found {len(row)}", str(path), line_number
            )
        rows.append(row)
    if not rows:
        raise DataFileError(f"No observations in {path}", str(path))
    logger.info(f"Loaded {len(rows)} observations for source {source_index} from {path}")
    return observation_set_from_values(np.array(rows), source_index)


def load_counts(path: Path, source_index: int = 0) -> ObservationSet:
    """Read pre-aggregated ``value,count`` lines."""
    support, counts = [], []
    for line_number, text in _data_lines(path):
        parts = text.split(',')
        try:
            value = [float(part) for part in parts[:-1]]
            count = int(parts[-1])
        except ValueError:
            raise DataFileError(f"Cannot parse counts line: {text!r}", str(path), line_number)
        if not value or count < 0:
            raise DataFileError(f"Expected value,count but found {text!r}", str(path), line_number)
        support.append(value)
        counts.append(count)
    if not support or sum(counts) == 0:
        raise DataFileError(f"No counts in {path}", str(path))
    return observation_set_from_counts(np.array(support), np.array(counts), source_index)


def load_data_file(path: Path, source_index: int = 0) -> ObservationSet:
    """Dispatch on the file suffix: ``.counts``/``.csv`` are counts files, anything else observations."""
    if Path(path).suffix in ('.counts', '.csv'):
        return load_counts(path, source_index)
    return load_observations(path, source_index)


def write_observations(path: Path, data: ObservationSet) -> Path:
    """Write raw observations, one per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        for row in np.atleast_2d(data.raw_observations):
            handle.write(','.join(repr(float(v)) for v in row) + '\n')
    return path


def write_counts(path: Path, data: ObservationSet) -> Path:
    """Write aggregated ``value,count`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        for row, count in zip(np.atleast_2d(data.distinct_support), data.counts):
            handle.write(','.join(repr(float(v)) for v in row) + f',{int(count)}\n')
    return path
