"""
Synthetic Dataset Generator

계층적 생성: θ_G ~ prior → 이미지 → (low(x), x) 쌍과 D_SL 매니페스트
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from src.data.manifest import DatasetManifest, write_manifest, write_pair
from src.data.transforms import LabeledPair, rescale_unit
from src.simgen.color import apply_color
from src.simgen.params import GeneratorConfig, ImageModel, sample_params
from src.simgen.spectrum import gen_spectrum_image
from src.simgen.wavelet import gen_wmm_image
from src.seeding import derive_seed

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MODEL_ORDER = (ImageModel.SPECTRUM, ImageModel.WMM, ImageModel.COMBINED)
BLEND_RANGE = (0.2, 0.8)
MANIFEST_NAME = "manifest.csv"


@dataclass
class SyntheticSample:
    """생성된 이미지와 선택된 모델"""
    model: ImageModel
    image: np.ndarray

    def to_dict(self):
        return {"model": self.model.value, "shape": list(self.image.shape)}


def sample_image(cfg: GeneratorConfig, rng: np.random.Generator) -> SyntheticSample:
    """
    모델 선택 → θ_G 샘플링 → gray field → color

    Args:
        cfg: 생성 설정
        rng: 이미지 하나에 대한 난수 스트림

    Returns:
        SyntheticSample (image: (H, W, 3))
    """
    size = tuple(cfg.image_size)
    model = MODEL_ORDER[int(rng.choice(len(MODEL_ORDER), p=np.asarray(cfg.model_mix)))]
    spectrum, wmm, color = sample_params(rng, size)

    if model is ImageModel.SPECTRUM:
        gray = gen_spectrum_image(spectrum, size, rng)
    elif model is ImageModel.WMM:
        gray = gen_wmm_image(wmm, size, rng)
    else:
        spectral = gen_spectrum_image(spectrum, size, rng)
        marginal = gen_wmm_image(wmm, size, rng)
        weight = rng.uniform(*BLEND_RANGE)
        gray = rescale_unit(weight * spectral + (1.0 - weight) * marginal)

    return SyntheticSample(model=model, image=apply_color(gray, color, rng))


def gen_combined(cfg: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    """(H, W, 3) 합성 컬러 이미지"""
    return sample_image(cfg, rng).image


def generate_pair(cfg: GeneratorConfig, pair_seed: int, sample_id: str = "") -> LabeledPair:
    """per-pair seed로 (low(x), x) 생성 (매니페스트 seed로 재생성할 때도 사용)"""
    sample = sample_image(cfg, np.random.default_rng(pair_seed))
    return LabeledPair.from_hr(sample.image, sample_id=sample_id, source=sample.model.value)


def gen_dataset(
    cfg: GeneratorConfig,
    count: int,
    out_dir: Optional[PathLike] = None,
    n_jobs: int = 1,
    lossless: bool = True,
    split: str = "train"
) -> List[LabeledPair]:
    """
    D_SL 생성

    Args:
        cfg: 생성 설정 (seed는 데이터셋 seed)
        count: 쌍 개수 M
        out_dir: 지정하면 이미지와 manifest.csv 기록
        n_jobs: joblib 병렬 작업 수
        lossless: raw 사이드카 저장 여부
        split: 매니페스트 split 태그

    Returns:
        LabeledPair 리스트 (index 순서)
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")

    seeds = [derive_seed(cfg.seed, i) for i in range(count)]
    ids = [f"sim_{i:05d}" for i in range(count)]
    pairs = Parallel(n_jobs=n_jobs)(
        delayed(generate_pair)(cfg, s, sample_id) for s, sample_id in zip(seeds, ids)
    )
    logger.info(f"Generated {count} synthetic pairs (size={tuple(cfg.image_size)}, seed={cfg.seed})")

    if out_dir is not None:
        out_dir = Path(out_dir)
        entries = [
            write_pair(out_dir, pair, split, seed=s, source=pair.source, lossless=lossless)
            for pair, s in zip(pairs, seeds)
        ]
        write_manifest(DatasetManifest(entries=entries, root=out_dir), out_dir / MANIFEST_NAME)

    return pairs
