"""
Uncertainty Diagnostics

샘플별 평균 불확실성과 오차의 관계(rank correlation), 불확실성 분포 히스토그램, error map
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from scipy import ndimage, stats

from src.data.image_io import atomic_write_text
from src.data.transforms import LabeledPair
from src.errors import ShapeError
from src.metrics.quality import mse
from src.model.network import NetworkParams, PredictiveOutput, predict_in_chunks

logger = logging.getLogger(__name__)

DEFAULT_BINS = 50
MIN_SAMPLES = 3

PathLike = Union[str, Path]


@dataclass
class UncertaintyDiagnostics:
    """불확실성-오차 진단 결과"""
    sample_ids: List[str]
    mean_uncertainty: List[float]
    sample_mse: List[float]
    bin_edges: List[float]
    counts: List[int]
    rank_correlation: float
    modes: int = 0
    degenerate: bool = False
    notes: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "n_samples": len(self.sample_ids),
            "rank_correlation": round(self.rank_correlation, 6),
            "modes": self.modes,
            "degenerate": self.degenerate,
            "histogram": {
                "bin_edges": [float(e) for e in self.bin_edges],
                "counts": [int(c) for c in self.counts],
            },
            "samples": [
                {"id": i, "mean_uncertainty": float(u), "mse": float(e)}
                for i, u, e in zip(self.sample_ids, self.mean_uncertainty, self.sample_mse)
            ],
            "notes": dict(self.notes),
        }


def rank_correlation(x: Sequence[float], y: Sequence[float]) -> Tuple[float, bool]:
    """
    Spearman rank correlation

    Args:
        x, y: 같은 길이의 값 목록 (3개 이상)

    Returns:
        (상관계수, 한쪽이 상수라 순서가 정의되지 않으면 True)
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"Length mismatch: {x.shape} vs {y.shape}")
    if x.size < MIN_SAMPLES:
        raise ValueError(
            f"Rank correlation is undefined for fewer than {MIN_SAMPLES} samples, got {x.size}"
        )
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0, True
    rho, _ = stats.spearmanr(x, y)
    return float(rho), False


def uncertainty_histogram(values: Sequence[float], bins: int = DEFAULT_BINS) -> Tuple[np.ndarray, np.ndarray]:
    """[0, 관측 최댓값] 위의 균등 bin 히스토그램"""
    values = np.asarray(values, dtype=np.float64)
    upper = float(values.max()) if values.size else 0.0
    if upper <= 0:
        upper = 1.0
    counts, edges = np.histogram(values, bins=bins, range=(0.0, upper))
    return counts, edges


def count_modes(counts: Sequence[float], window: int = 3) -> int:
    """
    이동 평균(window)으로 평활한 히스토그램의 극대 plateau 개수

    Args:
        counts: bin별 개수
        window: 평활 창 크기

    Returns:
        mode 개수
    """
    smoothed = ndimage.uniform_filter1d(np.asarray(counts, dtype=np.float64), size=window, mode="constant")
    n = smoothed.size
    modes = 0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and smoothed[j + 1] == smoothed[i]:
            j += 1
        left = i == 0 or smoothed[i - 1] < smoothed[i]
        right = j == n - 1 or smoothed[j + 1] < smoothed[j]
        if left and right and smoothed[i] > 0:
            modes += 1
        i = j + 1
    return modes


def diagnostics_from_values(
    sample_ids: Sequence[str],
    mean_uncertainty: Sequence[float],
    sample_mse: Sequence[float],
    bins: int = DEFAULT_BINS
) -> UncertaintyDiagnostics:
    """이미 계산된 (⟨σ̂²⟩, MSE) 쌍으로 진단 생성"""
    rho, degenerate = rank_correlation(mean_uncertainty, sample_mse)
    counts, edges = uncertainty_histogram(mean_uncertainty, bins)
    diag = UncertaintyDiagnostics(
        sample_ids=list(sample_ids),
        mean_uncertainty=[float(v) for v in mean_uncertainty],
        sample_mse=[float(v) for v in sample_mse],
        bin_edges=edges.tolist(),
        counts=counts.tolist(),
        rank_correlation=rho,
        modes=count_modes(counts),
        degenerate=degenerate,
    )
    if degenerate:
        diag.notes["rank_correlation"] = "constant input ordering; correlation reported as 0"
    return diag


def uncertainty_diagnostics(
    params: NetworkParams,
    eval_set: Sequence[LabeledPair],
    bins: int = DEFAULT_BINS,
    predictions: Optional[Sequence[PredictiveOutput]] = None
) -> UncertaintyDiagnostics:
    """
    평가 집합의 샘플별 (평균 σ̂², MSE), 히스토그램, Spearman 상관

    Args:
        params: ζ
        eval_set: HR이 있는 평가 쌍
        bins: 히스토그램 bin 수
        predictions: 이미 계산된 예측 (없으면 추론)

    Returns:
        UncertaintyDiagnostics
    """
    if len(eval_set) < MIN_SAMPLES:
        raise ValueError(
            f"Diagnostics need at least {MIN_SAMPLES} samples, got {len(eval_set)}"
        )
    preds = predictions if predictions is not None else predict_in_chunks(
        params, [p.lr for p in eval_set]
    )
    uncertainties = [pred.mean_uncertainty() for pred in preds]
    errors = [mse(np.clip(pred.mean, 0.0, 1.0), pair.hr) for pred, pair in zip(preds, eval_set)]
    diag = diagnostics_from_values([p.sample_id for p in eval_set], uncertainties, errors, bins)
    logger.info(
        f"Uncertainty diagnostics: n={len(eval_set)}, spearman={diag.rank_correlation:.4f}, "
        f"degenerate={diag.degenerate}"
    )
    return diag


def error_map(pred_mean: np.ndarray, y: np.ndarray) -> np.ndarray:
    """픽셀별 절대 오차의 채널 평균 (H, W, 1)"""
    pred_mean = np.asarray(pred_mean, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if pred_mean.shape != y.shape:
        raise ShapeError(f"Shape mismatch: {pred_mean.shape} vs {y.shape}")
    if pred_mean.ndim == 2:
        return np.abs(pred_mean - y)[:, :, None]
    return np.abs(pred_mean - y).mean(axis=2, keepdims=True)


def write_diagnostics(
    diag: UncertaintyDiagnostics,
    path: PathLike,
    extra: Optional[Dict] = None
) -> Path:
    """진단 결과를 YAML 텍스트로 저장 (extra는 최상위 블록으로 추가)"""
    document = diag.to_dict()
    document.update(extra or {})
    text = yaml.safe_dump(document, sort_keys=False, allow_unicode=True)
    return atomic_write_text(path, text)
