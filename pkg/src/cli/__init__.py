"""Command-line experiment harness"""

from .config import ExperimentConfig, load_experiment_config, parse_flat_config
from .commands import build_parser, dispatch
from .report import RESULT_COLUMNS, summarize, summary_columns

__all__ = [
    "ExperimentConfig",
    "load_experiment_config",
    "parse_flat_config",
    "build_parser",
    "dispatch",
    "RESULT_COLUMNS",
    "summary_columns",
    "summarize",
]
