"""
Image Tensor Transforms

ImageTensor 검증, low(·) 4× 다운샘플링, LR-HR 쌍 정의
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import ShapeError

logger = logging.getLogger(__name__)

SCALE = 4


def as_image(values, name: str = "image", check_range: bool = True) -> np.ndarray:
    """
    ImageTensor(H×W×C, C ∈ {1,3}, float32, [0,1]) 검증 및 변환

    Args:
        values: 2차원 (H, W) 또는 3차원 (H, W, C) 배열
        name: 오류 메시지용 이름
        check_range: [0,1] 범위 검사 여부

    Returns:
        (H, W, C) float32 배열
    """
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeError(f"{name}: expected HxWxC with C in (1, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: values must be finite")
    if check_range and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(
            f"{name}: values must lie in [0, 1], got [{arr.min():.4f}, {arr.max():.4f}]"
        )
    return arr


def rescale_unit(field: np.ndarray) -> np.ndarray:
    """이미지별 affine min-max 정규화 → [0, 1]"""
    field = np.asarray(field, dtype=np.float64)
    lo, hi = field.min(), field.max()
    if hi - lo <= 0:
        return np.zeros_like(field, dtype=np.float32)
    return ((field - lo) / (hi - lo)).astype(np.float32)


def downsample_4x(hr: np.ndarray) -> np.ndarray:
    """
    low(·): 4×4 블록 평균 (box filter)

    Args:
        hr: (H, W, C) 이미지, H와 W는 4의 배수

    Returns:
        (H/4, W/4, C) 이미지
    """
    hr = np.asarray(hr)
    if hr.ndim == 2:
        hr = hr[:, :, None]
    h, w, c = hr.shape
    if h % SCALE or w % SCALE:
        raise ShapeError(f"Image dims must be divisible by {SCALE}, got {h}x{w}")
    blocks = hr.reshape(h // SCALE, SCALE, w // SCALE, SCALE, c)
    return blocks.mean(axis=(1, 3), dtype=np.float64).astype(np.float32)


def upsample_nearest_4x(lr: np.ndarray) -> np.ndarray:
    """nearest-neighbour 4× 업샘플링 (HWC 또는 NCHW)"""
    lr = np.asarray(lr)
    if lr.ndim == 4:
        return lr.repeat(SCALE, axis=2).repeat(SCALE, axis=3)
    return lr.repeat(SCALE, axis=0).repeat(SCALE, axis=1)


@dataclass
class LabeledPair:
    """(low(x), x) 학습 쌍"""
    lr: np.ndarray
    hr: np.ndarray
    sample_id: str = ""
    source: str = ""

    def __post_init__(self):
        self.lr = as_image(self.lr, name=f"lr[{self.sample_id}]")
        self.hr = as_image(self.hr, name=f"hr[{self.sample_id}]")
        lh, lw, lc = self.lr.shape
        hh, hw, hc = self.hr.shape
        if (hh, hw) != (SCALE * lh, SCALE * lw) or lc != hc:
            raise ShapeError(
                f"Pair {self.sample_id}: HR {self.hr.shape} is not {SCALE}x LR {self.lr.shape}"
            )

    @classmethod
    def from_hr(cls, hr: np.ndarray, sample_id: str = "", source: str = "") -> "LabeledPair":
        hr = as_image(hr, name=f"hr[{sample_id}]")
        return cls(lr=downsample_4x(hr), hr=hr, sample_id=sample_id, source=source)
