"""Pool scoring, acquisition strategies and the per-arm pipeline"""

from .pool import PoolEntry, PoolManifest, ScoredSample, score_pool
from .selection import (
    AcquisitionStrategy,
    SelectionResult,
    StrategyKind,
    apply_strategy,
    read_selection,
    select_random,
    top_k,
    write_selection,
)
from .pipeline import (
    Arm,
    PipelineConfig,
    RunReport,
    ensure_pretrained,
    label_selection,
    read_report,
    round_sizes,
    run_pipeline,
)

__all__ = [
    "PoolEntry",
    "PoolManifest",
    "ScoredSample",
    "score_pool",
    "AcquisitionStrategy",
    "SelectionResult",
    "StrategyKind",
    "apply_strategy",
    "read_selection",
    "select_random",
    "top_k",
    "write_selection",
    "Arm",
    "PipelineConfig",
    "RunReport",
    "ensure_pretrained",
    "label_selection",
    "read_report",
    "round_sizes",
    "run_pipeline",
]
