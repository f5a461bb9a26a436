"""
Spectral Analysis

radially-averaged power spectrum 기울기 추정 (spectrum 모델 검증, 도메인 shift 측정)
"""

import logging

import numpy as np

from src.simgen.params import MIN_SIDE

logger = logging.getLogger(__name__)


def radial_power_spectrum(image: np.ndarray):
    """
    정수 반경 bin별 평균 power

    Args:
        image: (H, W) 또는 (H, W, C) 이미지 (C > 1이면 채널 평균)

    Returns:
        (반경 배열, 평균 power 배열), 반경은 짧은 변 기준 cycles/image
    """
    gray = np.asarray(image, dtype=np.float64)
    if gray.ndim == 3:
        gray = gray.mean(axis=2)
    if gray.ndim != 2:
        raise ValueError(f"Expected a 2-D or HxWxC image, got {gray.shape}")

    h, w = gray.shape
    side = min(h, w)
    power = np.abs(np.fft.fft2(gray - gray.mean())) ** 2
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    radius = np.rint(np.hypot(fy, fx) * side).astype(np.int64)

    sums = np.bincount(radius.ravel(), weights=power.ravel())
    counts = np.bincount(radius.ravel())
    valid = counts > 0
    radii = np.nonzero(valid)[0]
    return radii, sums[valid] / counts[valid]


def estimate_power_spectrum_slope(img: np.ndarray) -> float:
    """
    log power vs log frequency의 최소제곱 기울기 ([2, min(H,W)/2 - 1] 구간)

    Args:
        img: 각 변 16 이상, 분산이 0이 아닌 이미지

    Returns:
        기울기 (1/f magnitude이면 약 -2)
    """
    arr = np.asarray(img, dtype=np.float64)
    if min(arr.shape[:2]) < MIN_SIDE:
        raise ValueError(f"Image sides must be >= {MIN_SIDE}, got {arr.shape[:2]}")
    if np.var(arr) == 0:
        raise ValueError("zero variance")

    radii, power = radial_power_spectrum(arr)
    upper = min(arr.shape[:2]) // 2 - 1
    band = (radii >= 2) & (radii <= upper) & (power > 0)
    if band.sum() < 2:
        raise ValueError("Not enough nonzero frequency bins to fit a slope")

    slope, _ = np.polyfit(np.log(radii[band]), np.log(power[band]), 1)
    return float(slope)
