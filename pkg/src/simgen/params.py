"""
Statistical Image Model Parameters

θ_G 사전분포(prior)와 생성 설정
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from src.data.transforms import SCALE

logger = logging.getLogger(__name__)

EXPONENT_RANGE = (0.5, 3.5)
BAND_SCALE_RANGE = (0.05, 0.5)
BAND_SHAPE_RANGE = (0.4, 1.5)
JITTER_RANGE = (0.0, 0.05)
PALETTE_SIZE_RANGE = (2, 16)
MIN_PALETTE, MAX_PALETTE = 2, 64
BANDS_PER_LEVEL = 3
MIN_SIDE = 16


class ImageModel(Enum):
    """통계적 이미지 모델 종류"""
    SPECTRUM = "spectrum"
    WMM = "wmm"
    COMBINED = "combined"


@dataclass(frozen=True)
class SpectrumParams:
    """FT magnitude 1/(|f_x|^a + |f_y|^b)의 지수"""
    a: float
    b: float

    def __post_init__(self):
        lo, hi = EXPONENT_RANGE
        for name, value in (("a", self.a), ("b", self.b)):
            if not lo <= value <= hi:
                raise ValueError(f"Spectrum exponent {name} must be in [{lo}, {hi}], got {value}")

    def to_dict(self) -> Dict:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class WMMParams:
    """
    wavelet-marginal 모델 파라미터

    band_scales/band_shapes는 레벨 순서(가장 고주파 먼저)로 레벨당 (LH, HL, HH) 3개씩
    """
    num_scales: int
    band_scales: Tuple[float, ...]
    band_shapes: Tuple[float, ...]

    def __post_init__(self):
        if self.num_scales < 1:
            raise ValueError(f"num_scales must be >= 1, got {self.num_scales}")
        expected = BANDS_PER_LEVEL * self.num_scales
        if len(self.band_scales) != expected or len(self.band_shapes) != expected:
            raise ValueError(
                f"Expected {expected} band parameters for {self.num_scales} scales, "
                f"got {len(self.band_scales)} scales and {len(self.band_shapes)} shapes"
            )
        if any(s <= 0 for s in self.band_scales):
            raise ValueError("Band scales must be positive")
        if any(not 0.3 < p <= 2.0 for p in self.band_shapes):
            raise ValueError("Band shape exponents must lie in (0.3, 2.0]")

    def band(self, level: int, orientation: int) -> Tuple[float, float]:
        """(s, p) of one detail band"""
        index = BANDS_PER_LEVEL * level + orientation
        return self.band_scales[index], self.band_shapes[index]

    def to_dict(self) -> Dict:
        return {
            "num_scales": self.num_scales,
            "band_scales": list(self.band_scales),
            "band_shapes": list(self.band_shapes),
        }


@dataclass(frozen=True)
class ColorHistParams:
    """dead-leaves 스타일 팔레트"""
    palette: Tuple[Tuple[float, float, float], ...]
    weights: Tuple[float, ...]
    jitter: float = 0.0

    def __post_init__(self):
        if len(self.palette) == 0:
            raise ValueError("Palette must not be empty")
        if not MIN_PALETTE <= len(self.palette) <= MAX_PALETTE:
            raise ValueError(
                f"Palette must hold {MIN_PALETTE}..{MAX_PALETTE} colors, got {len(self.palette)}"
            )
        if len(self.weights) != len(self.palette):
            raise ValueError(
                f"Weights ({len(self.weights)}) and palette ({len(self.palette)}) lengths differ"
            )
        colors = np.asarray(self.palette, dtype=np.float64)
        if colors.shape[1] != 3 or colors.min() < 0 or colors.max() > 1:
            raise ValueError("Palette colors must be (r, g, b) triples in [0, 1]")
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"Palette weights must be a probability vector, sum={weights.sum()}")
        if self.jitter < 0:
            raise ValueError(f"Jitter must be >= 0, got {self.jitter}")

    def to_dict(self) -> Dict:
        return {
            "palette": [list(c) for c in self.palette],
            "weights": list(self.weights),
            "jitter": self.jitter,
        }


class GeneratorConfig(BaseModel):
    """합성 데이터셋 생성 설정"""
    model_mix: Tuple[float, float, float] = Field(
        default=(0.0, 0.0, 1.0),
        description="(spectrum, wmm, combined) 선택 확률"
    )
    image_size: Tuple[int, int] = Field(default=(64, 64))
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("model_mix")
    @classmethod
    def _mix_is_distribution(cls, value):
        if any(p < 0 for p in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ValueError(f"model_mix must be a probability vector, got {value}")
        return value

    @field_validator("image_size")
    @classmethod
    def _size_divisible(cls, value):
        h, w = value
        if h % SCALE or w % SCALE:
            raise ValueError(f"image_size must be divisible by {SCALE}, got {h}x{w}")
        if min(h, w) < MIN_SIDE:
            raise ValueError(f"image_size sides must be >= {MIN_SIDE}, got {h}x{w}")
        return value


def max_scales(size: Tuple[int, int]) -> int:
    """
    이미지 크기가 허용하는 최대 wavelet pyramid 깊이

    Args:
        size: (H, W)

    Returns:
        min(floor(log2(min side)) - 2, 두 변이 2로 나누어지는 횟수)
    """
    h, w = int(size[0]), int(size[1])
    if min(h, w) < 1:
        return 0
    by_size = int(np.floor(np.log2(min(h, w)))) - 2
    by_parity = 0
    while h % 2 == 0 and w % 2 == 0 and h > 1 and w > 1:
        h, w = h // 2, w // 2
        by_parity += 1
    return max(0, min(by_size, by_parity))


def sample_params(
    rng: np.random.Generator,
    size: Tuple[int, int] = (64, 64)
) -> Tuple[SpectrumParams, WMMParams, ColorHistParams]:
    """
    θ_G를 사전분포에서 샘플링

    Args:
        rng: GeneratorConfig.seed로 초기화된 난수 스트림
        size: WMM 깊이 상한을 결정할 이미지 크기

    Returns:
        (SpectrumParams, WMMParams, ColorHistParams)
    """
    spectrum = SpectrumParams(
        a=float(rng.uniform(*EXPONENT_RANGE)),
        b=float(rng.uniform(*EXPONENT_RANGE)),
    )

    depth_cap = max_scales(size)
    if depth_cap < 1:
        raise ValueError(f"Image size {size} admits no wavelet scales")
    num_scales = int(rng.integers(1, depth_cap + 1))
    n_bands = BANDS_PER_LEVEL * num_scales
    wmm = WMMParams(
        num_scales=num_scales,
        band_scales=tuple(float(s) for s in rng.uniform(*BAND_SCALE_RANGE, size=n_bands)),
        band_shapes=tuple(float(p) for p in rng.uniform(*BAND_SHAPE_RANGE, size=n_bands)),
    )

    n_colors = int(rng.integers(PALETTE_SIZE_RANGE[0], PALETTE_SIZE_RANGE[1] + 1))
    palette = rng.uniform(0.0, 1.0, size=(n_colors, 3))
    weights = rng.dirichlet(np.ones(n_colors))
    weights = weights / weights.sum()
    color = ColorHistParams(
        palette=tuple(tuple(float(v) for v in c) for c in palette),
        weights=tuple(float(w) for w in weights),
        jitter=float(rng.uniform(*JITTER_RANGE)),
    )
    return spectrum, wmm, color


def luminance(colors: np.ndarray) -> np.ndarray:
    """Rec.601 luma"""
    colors = np.asarray(colors, dtype=np.float64)
    return colors @ np.array([0.299, 0.587, 0.114])
