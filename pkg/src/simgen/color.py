"""
Color Histogram Model

gray level을 휘도 순으로 정렬된 팔레트의 quantile bin에 대응
"""

import logging
from typing import Tuple

import numpy as np
from scipy import stats

from src.data.transforms import as_image
from src.simgen.params import ColorHistParams, luminance

logger = logging.getLogger(__name__)


def sorted_palette(c: ColorHistParams) -> Tuple[np.ndarray, np.ndarray]:
    """휘도 오름차순 팔레트와 그에 맞춘 가중치"""
    if len(c.palette) == 0:
        raise ValueError("Palette must not be empty")
    colors = np.asarray(c.palette, dtype=np.float64)
    order = np.argsort(luminance(colors), kind="stable")
    return colors[order], np.asarray(c.weights, dtype=np.float64)[order]


def palette_indices(gray: np.ndarray, c: ColorHistParams) -> np.ndarray:
    """
    각 픽셀이 속하는 bin (휘도 정렬 팔레트 기준 인덱스)

    Args:
        gray: (H, W) 또는 (H, W, 1) [0, 1] 이미지
        c: 팔레트 파라미터

    Returns:
        (H, W) 정수 인덱스
    """
    gray = as_image(gray, name="gray")
    if gray.shape[2] != 1:
        raise ValueError(f"apply_color expects a 1-channel image, got {gray.shape}")
    _, weights = sorted_palette(c)

    flat = gray[:, :, 0].ravel()
    quantiles = stats.rankdata(flat, method="max") / flat.size
    edges = np.cumsum(weights)
    edges[-1] = 1.0
    indices = np.searchsorted(edges, quantiles, side="left")
    return np.minimum(indices, len(edges) - 1).reshape(gray.shape[:2])


def apply_color(
    gray: np.ndarray,
    c: ColorHistParams,
    rng: np.random.Generator
) -> np.ndarray:
    """
    gray level → 팔레트 색 (+ clip된 jitter)

    Args:
        gray: 1채널 [0, 1] 이미지
        c: 팔레트, 가중치, jitter
        rng: 난수 스트림 (jitter > 0일 때만 소비)

    Returns:
        (H, W, 3) float32 이미지
    """
    colors, _ = sorted_palette(c)
    image = colors[palette_indices(gray, c)]
    if c.jitter > 0:
        image = image + rng.normal(0.0, c.jitter, size=image.shape)
    return np.clip(image, 0.0, 1.0).astype(np.float32)
