"""Image quality metrics, relative boost and uncertainty diagnostics"""

from .quality import (
    MetricReport,
    evaluate_predictions,
    image_metrics,
    mae,
    mse,
    pboost,
    psnr,
    ssim,
)
from .diagnostics import (
    UncertaintyDiagnostics,
    count_modes,
    error_map,
    rank_correlation,
    uncertainty_diagnostics,
    write_diagnostics,
)
from .shift import ShiftLevel, ShiftResult, UncertaintyShiftDetector, compare_uncertainty_distributions

__all__ = [
    "MetricReport",
    "evaluate_predictions",
    "image_metrics",
    "mae",
    "mse",
    "pboost",
    "psnr",
    "ssim",
    "UncertaintyDiagnostics",
    "count_modes",
    "error_map",
    "rank_correlation",
    "uncertainty_diagnostics",
    "write_diagnostics",
    "ShiftLevel",
    "ShiftResult",
    "UncertaintyShiftDetector",
    "compare_uncertainty_distributions",
]
