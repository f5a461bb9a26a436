"""
Wavelet-Marginal Model

LeGall 5/3 lifting pyramid와 generalized Laplacian 히스토그램 매칭
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import stats

from src.data.transforms import rescale_unit
from src.simgen.params import BANDS_PER_LEVEL, WMMParams, max_scales

logger = logging.getLogger(__name__)

MATCH_ITERATIONS = 3

Bands = Tuple[np.ndarray, np.ndarray, np.ndarray]


# ============================================================
# 1-D lifting (symmetric extension)
# ============================================================

def _lift_forward(x: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    x = np.moveaxis(x, axis, 0)
    if x.shape[0] % 2:
        raise ValueError(f"Lifting needs an even length, got {x.shape[0]}")
    even, odd = x[0::2], x[1::2]
    even_next = np.concatenate([even[1:], even[-1:]], axis=0)
    detail = odd - 0.5 * (even + even_next)
    detail_prev = np.concatenate([detail[:1], detail[:-1]], axis=0)
    smooth = even + 0.25 * (detail_prev + detail)
    return np.moveaxis(smooth, 0, axis), np.moveaxis(detail, 0, axis)


def _lift_inverse(smooth: np.ndarray, detail: np.ndarray, axis: int) -> np.ndarray:
    smooth = np.moveaxis(smooth, axis, 0)
    detail = np.moveaxis(detail, axis, 0)
    detail_prev = np.concatenate([detail[:1], detail[:-1]], axis=0)
    even = smooth - 0.25 * (detail_prev + detail)
    even_next = np.concatenate([even[1:], even[-1:]], axis=0)
    odd = detail + 0.5 * (even + even_next)

    out = np.empty((2 * even.shape[0],) + even.shape[1:], dtype=np.float64)
    out[0::2], out[1::2] = even, odd
    return np.moveaxis(out, 0, axis)


def _analyze(image: np.ndarray) -> Tuple[np.ndarray, Bands]:
    lo_x, hi_x = _lift_forward(image, axis=1)
    ll, lh = _lift_forward(lo_x, axis=0)
    hl, hh = _lift_forward(hi_x, axis=0)
    return ll, (lh, hl, hh)


def _synthesize(ll: np.ndarray, bands: Bands) -> np.ndarray:
    lh, hl, hh = bands
    lo_x = _lift_inverse(ll, lh, axis=0)
    hi_x = _lift_inverse(hl, hh, axis=0)
    return _lift_inverse(lo_x, hi_x, axis=1)


# ============================================================
# Pyramid
# ============================================================

@dataclass
class WaveletPyramid:
    """레벨별 (LH, HL, HH) detail band와 lowpass 잔차 (가장 고주파 레벨 먼저)"""
    levels: List[Bands] = field(default_factory=list)
    lowpass: Optional[np.ndarray] = None

    @property
    def num_scales(self) -> int:
        return len(self.levels)

    @classmethod
    def decompose(cls, image: np.ndarray, num_scales: int) -> "WaveletPyramid":
        """
        2차원 이미지를 num_scales 레벨로 분해

        Args:
            image: (H, W) 배열
            num_scales: 분해 레벨 수

        Returns:
            WaveletPyramid
        """
        image = np.asarray(image, dtype=np.float64)
        if image.ndim == 3 and image.shape[2] == 1:
            image = image[:, :, 0]
        if image.ndim != 2:
            raise ValueError(f"Pyramid expects a 2-D image, got {image.shape}")
        if not 1 <= num_scales <= max_scales(image.shape):
            raise ValueError(
                f"num_scales={num_scales} is invalid for size {image.shape} "
                f"(max {max_scales(image.shape)})"
            )

        levels = []
        current = image
        for _ in range(num_scales):
            current, bands = _analyze(current)
            levels.append(bands)
        return cls(levels=levels, lowpass=current)

    def reconstruct(self) -> np.ndarray:
        """정확한 역변환"""
        current = self.lowpass
        for bands in reversed(self.levels):
            current = _synthesize(current, bands)
        return current

    def bands(self) -> List[Tuple[int, int, np.ndarray]]:
        """(level, orientation, coefficients) 평탄화 목록"""
        return [
            (level, orientation, band)
            for level, bands in enumerate(self.levels)
            for orientation, band in enumerate(bands)
        ]


def generalized_laplacian_quantiles(n: int, scale: float, shape: float) -> np.ndarray:
    """밀도 ∝ exp(-|x/s|^p)의 (i + 0.5)/n 분위수"""
    probs = (np.arange(n) + 0.5) / n
    return stats.gennorm.ppf(probs, shape, scale=scale)


def match_band(band: np.ndarray, scale: float, shape: float) -> np.ndarray:
    """rank 기반 히스토그램 매칭 (동률은 위치 순서)"""
    flat = band.ravel()
    ranks = stats.rankdata(flat, method="ordinal").astype(np.int64) - 1
    targets = generalized_laplacian_quantiles(flat.size, scale, shape)
    return targets[ranks].reshape(band.shape)


def match_bands(pyramid: WaveletPyramid, p: WMMParams) -> WaveletPyramid:
    """
    모든 detail band를 generalized Laplacian 분포에 매칭 (lowpass는 유지)

    Args:
        pyramid: 분해 결과
        p: band별 (s, p)

    Returns:
        매칭된 새 pyramid
    """
    if pyramid.num_scales != p.num_scales:
        raise ValueError(
            f"Pyramid has {pyramid.num_scales} scales, params describe {p.num_scales}"
        )
    levels = []
    for level, bands in enumerate(pyramid.levels):
        matched = tuple(
            match_band(band, *p.band(level, orientation))
            for orientation, band in enumerate(bands)
        )
        levels.append(matched)
    return WaveletPyramid(levels=levels, lowpass=pyramid.lowpass.copy())


def gen_wmm_image(
    p: WMMParams,
    size: Tuple[int, int],
    rng: np.random.Generator,
    iterations: int = MATCH_ITERATIONS
) -> np.ndarray:
    """
    WMM 이미지 생성: white noise → (분해, 매칭, 재구성, rescale) 반복

    Args:
        p: WMM 파라미터
        size: (H, W)
        rng: 난수 스트림
        iterations: 매칭-재구성 반복 횟수

    Returns:
        (H, W, 1) float32 이미지
    """
    size = (int(size[0]), int(size[1]))
    if p.num_scales > max_scales(size):
        raise ValueError(
            f"num_scales={p.num_scales} exceeds the maximum {max_scales(size)} for size {size}"
        )
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    image = rescale_unit(rng.standard_normal(size)).astype(np.float64)
    for _ in range(iterations):
        pyramid = match_bands(WaveletPyramid.decompose(image, p.num_scales), p)
        image = rescale_unit(pyramid.reconstruct()).astype(np.float64)

    logger.debug(f"WMM image generated: scales={p.num_scales}, bands={BANDS_PER_LEVEL * p.num_scales}")
    return image.astype(np.float32)[:, :, None]
