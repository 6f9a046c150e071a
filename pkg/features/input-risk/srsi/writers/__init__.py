"""
Result and checkpoint writers.
"""

from .checkpoint_writer import save_checkpoint, load_checkpoint
from .result_writer import (
    write_run_directory, write_metrics, write_reclassify_table, format_reclassify_table,
    format_summary, read_risk_set, read_trace, run_directory_name,
)

__all__ = [
    'save_checkpoint', 'load_checkpoint',
    'write_run_directory', 'write_metrics', 'write_reclassify_table', 'format_reclassify_table',
    'format_summary', 'read_risk_set', 'read_trace', 'run_directory_name',
]
