"""
Spectrum Model

FT magnitude가 1/(|f_x|^a + |f_y|^b)를 따르는 random-phase 이미지
"""

import logging
from typing import Tuple

import numpy as np

from src.data.transforms import rescale_unit
from src.simgen.params import MIN_SIDE, SpectrumParams

logger = logging.getLogger(__name__)


def spectrum_magnitude(p: SpectrumParams, size: Tuple[int, int]) -> np.ndarray:
    """주파수 격자 위의 magnitude (DC는 0)"""
    h, w = size
    fy = np.abs(np.fft.fftfreq(h))[:, None]
    fx = np.abs(np.fft.fftfreq(w))[None, :]
    denominator = fx ** p.a + fy ** p.b
    magnitude = np.zeros((h, w))
    nonzero = denominator > 0
    magnitude[nonzero] = 1.0 / denominator[nonzero]
    return magnitude


def random_phase(size: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """
    실수 역변환과 일관된(Hermitian) 단위 크기 위상

    white noise의 FT를 정규화해서 얻으므로 켤레 대칭이 자동으로 성립
    """
    spectrum = np.fft.fft2(rng.standard_normal(size))
    modulus = np.abs(spectrum)
    return np.where(modulus > 0, spectrum / np.where(modulus > 0, modulus, 1.0), 1.0)


def gen_spectrum_image(
    p: SpectrumParams,
    size: Tuple[int, int],
    rng: np.random.Generator
) -> np.ndarray:
    """
    spectrum 모델 이미지 생성

    Args:
        p: 지수 (a, b)
        size: (H, W), 각 변 16 이상
        rng: 난수 스트림

    Returns:
        (H, W, 1) float32 이미지, [0, 1]로 min-max rescale
    """
    h, w = int(size[0]), int(size[1])
    if h < MIN_SIDE or w < MIN_SIDE:
        raise ValueError(f"Spectrum image needs sides >= {MIN_SIDE}, got {h}x{w}")

    field = np.fft.ifft2(spectrum_magnitude(p, (h, w)) * random_phase((h, w), rng)).real
    return rescale_unit(field)[:, :, None]
