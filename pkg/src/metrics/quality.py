"""
Image Quality Metrics

MSE, MAE, PSNR, SSIM과 상대 성능 향상(pboost)
"""

import logging
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import ndimage
from sklearn.metrics import mean_absolute_error, mean_squared_error

from src.data.transforms import LabeledPair
from src.errors import InfinitePSNRError, PBoostUndefinedError, ShapeError
from src.model.network import NetworkParams, predict_in_chunks

logger = logging.getLogger(__name__)

SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5
SSIM_RADIUS = int(SSIM_TRUNCATE * SSIM_SIGMA + 0.5)
SSIM_WINDOW = 2 * SSIM_RADIUS + 1
K1, K2 = 0.01, 0.03
PSNR_CAP = 100.0


class MetricReport(BaseModel):
    """평가 집합 평균 메트릭"""
    mse: float = Field(ge=0)
    mae: float = Field(ge=0)
    psnr: float
    ssim: float = Field(ge=-1, le=1)
    n_samples: int = Field(default=1, ge=1)

    def as_row(self) -> Dict[str, float]:
        return {"mse": self.mse, "mae": self.mae, "psnr": self.psnr, "ssim": self.ssim}


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """픽셀-채널 평균 제곱 오차"""
    a, b = _pair(a, b)
    return float(mean_squared_error(a.ravel(), b.ravel()))


def mae(a: np.ndarray, b: np.ndarray) -> float:
    """픽셀-채널 평균 절대 오차"""
    a, b = _pair(a, b)
    return float(mean_absolute_error(a.ravel(), b.ravel()))


def psnr_from_mse(value: float, max_val: float = 1.0) -> float:
    if value <= 0:
        raise InfinitePSNRError("infinite PSNR: images are identical")
    return float(10.0 * np.log10(max_val * max_val / value))


def psnr(a: np.ndarray, b: np.ndarray, max_val: float = 1.0) -> float:
    """
    PSNR (dB)

    Args:
        a, b: 같은 shape의 이미지
        max_val: 신호 최댓값

    Returns:
        10·log10(max_val² / mse)
    """
    return psnr_from_mse(mse(a, b), max_val)


def _to_gray(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        image = image.mean(axis=2)
    if image.ndim != 2:
        raise ShapeError(f"SSIM expects HxW or HxWxC images, got {image.shape}")
    return image


def ssim(a: np.ndarray, b: np.ndarray, max_val: float = 1.0) -> float:
    """
    채널 평균 grayscale 위의 평균 local SSIM (11×11 Gaussian, σ=1.5, valid window만)

    Args:
        a, b: 같은 shape의 이미지 (각 변 11 이상)
        max_val: 동적 범위 L

    Returns:
        평균 SSIM
    """
    a, b = _pair(a, b)
    a, b = _to_gray(a), _to_gray(b)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"Image {a.shape} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")

    c1 = (K1 * max_val) ** 2
    c2 = (K2 * max_val) ** 2

    def blur(x):
        return ndimage.gaussian_filter(x, sigma=SSIM_SIGMA, truncate=SSIM_TRUNCATE)

    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a * mu_a
    var_b = blur(b * b) - mu_b * mu_b
    cov = blur(a * b) - mu_a * mu_b

    numerator = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    ssim_map = numerator / denominator

    r = SSIM_RADIUS
    return float(ssim_map[r:-r, r:-r].mean())


def pboost(psnr_usim: float, psnr_simrand: float, psnr_sim: float) -> float:
    """
    SIM 대비 SIM+Random 향상분에 대한 USIM-DAL 추가 향상 비율 (%)

    Args:
        psnr_usim: USIM-DAL PSNR
        psnr_simrand: SIM+Random PSNR
        psnr_sim: SIM PSNR

    Returns:
        (psnr_usim - psnr_simrand) · 100 / (psnr_simrand - psnr_sim)
    """
    denominator = psnr_simrand - psnr_sim
    if denominator == 0:
        raise PBoostUndefinedError("SIM+Random equals SIM baseline")
    return float((psnr_usim - psnr_simrand) * 100.0 / denominator)


def image_metrics(pred: np.ndarray, target: np.ndarray) -> Dict[str, float]:
    """이미지 한 장의 MSE/MAE/PSNR/SSIM (PSNR은 동일 이미지면 상한값)"""
    value = mse(pred, target)
    try:
        peak = psnr_from_mse(value)
    except InfinitePSNRError:
        peak = PSNR_CAP
    return {
        "mse": value,
        "mae": mae(pred, target),
        "psnr": min(peak, PSNR_CAP),
        "ssim": ssim(pred, target),
    }


def evaluate_predictions(
    params: NetworkParams,
    pairs: Sequence[LabeledPair],
    batch_size: int = 16
) -> MetricReport:
    """
    평가 집합에서 예측 평균(clip [0,1])의 이미지별 메트릭 평균

    Args:
        params: 평가할 ζ
        pairs: HR이 있는 평가 쌍
        batch_size: 추론 배치 크기

    Returns:
        MetricReport
    """
    if not pairs:
        raise ValueError("Evaluation set is empty")
    preds = predict_in_chunks(params, [p.lr for p in pairs], batch_size=batch_size)
    rows: List[Dict[str, float]] = [
        image_metrics(np.clip(pred.mean, 0.0, 1.0), pair.hr)
        for pred, pair in zip(preds, pairs)
    ]
    report = MetricReport(
        mse=float(np.mean([r["mse"] for r in rows])),
        mae=float(np.mean([r["mae"] for r in rows])),
        psnr=float(np.mean([r["psnr"] for r in rows])),
        ssim=float(np.mean([r["ssim"] for r in rows])),
        n_samples=len(rows),
    )
    logger.info(
        f"Evaluation: n={report.n_samples}, PSNR={report.psnr:.4f}, SSIM={report.ssim:.4f}"
    )
    return report
