"""
Target-Domain Corpora

SIM 이미지와 통계적으로 다른 절차적 도메인 코퍼스(textures / gradients / mosaics)와
사용자 이미지 디렉토리 ingest
"""

import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from src.data.image_io import load_image
from src.data.manifest import (
    DatasetManifest,
    ManifestEntry,
    merge_manifests,
    read_manifest,
    split_manifest,
    write_manifest,
    write_pair,
)
from src.data.transforms import SCALE, LabeledPair, rescale_unit
from src.errors import ConfigError, ManifestError
from src.seeding import derive_seed

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.csv"
DEFAULT_TEST_RATIO = 0.2


class CorpusKind(Enum):
    """도메인 코퍼스 종류"""
    TEXTURES = "textures"
    GRADIENTS = "gradients"
    MOSAICS = "mosaics"


# ============================================================
# Procedural generators
# ============================================================

def _grid(size: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    h, w = size
    return np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")


def _texture(size: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """1~3개의 방향성 sinusoid grating 합 + 약한 잡음"""
    yy, xx = _grid(size)
    image = np.zeros(size + (3,))
    for _ in range(int(rng.integers(1, 4))):
        theta = rng.uniform(0.0, np.pi)
        freq = rng.uniform(0.05, 0.25)
        phase = rng.uniform(0.0, 2 * np.pi)
        wave = np.sin(2 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta)) + phase)
        image += wave[:, :, None] * rng.uniform(0.0, 1.0, size=3)
    image += rng.normal(0.0, rng.uniform(0.0, 0.05), size=image.shape)
    return rescale_unit(image)


def _gradient(size: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """선형 또는 방사형 색 ramp + 약한 잡음"""
    h, w = size
    yy, xx = _grid(size)
    if rng.random() < 0.5:
        theta = rng.uniform(0.0, 2 * np.pi)
        ramp = xx * np.cos(theta) + yy * np.sin(theta)
    else:
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        ramp = np.hypot(yy - cy, xx - cx)
    ramp = rescale_unit(ramp).astype(np.float64)

    start = rng.uniform(0.0, 1.0, size=3)
    end = rng.uniform(0.0, 1.0, size=3)
    image = start + ramp[:, :, None] * (end - start)
    image += rng.normal(0.0, rng.uniform(0.0, 0.03), size=image.shape)
    return np.clip(image, 0.0, 1.0).astype(np.float32)


def _mosaic(size: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Voronoi 다각형 모자이크 (셀 개수 4~64, 셀별 단색)"""
    h, w = size
    n_cells = int(rng.integers(4, 65))
    centers = rng.uniform(0.0, 1.0, size=(n_cells, 2)) * np.array([h, w])
    colors = rng.uniform(0.0, 1.0, size=(n_cells, 3))

    yy, xx = _grid(size)
    points = np.stack([yy.ravel() + 0.5, xx.ravel() + 0.5], axis=1)
    _, labels = cKDTree(centers).query(points)
    image = colors[labels].reshape(h, w, 3)
    image += rng.normal(0.0, 0.01, size=image.shape)
    return np.clip(image, 0.0, 1.0).astype(np.float32)


_GENERATORS = {
    CorpusKind.TEXTURES: _texture,
    CorpusKind.GRADIENTS: _gradient,
    CorpusKind.MOSAICS: _mosaic,
}


def _check_size(size: Tuple[int, int]) -> Tuple[int, int]:
    h, w = (int(size[0]), int(size[1]))
    if h % SCALE or w % SCALE or h < SCALE or w < SCALE:
        raise ConfigError(f"Image size must be divisible by {SCALE}, got {h}x{w}")
    return h, w


def generate_domain_images(
    kind: Union[CorpusKind, str],
    count: int,
    size: Tuple[int, int],
    seed: int
) -> List[Tuple[np.ndarray, int]]:
    """
    도메인 HR 이미지 생성 (디스크 기록 없음)

    Args:
        kind: 코퍼스 종류
        count: 이미지 개수
        size: (H, W)
        seed: 코퍼스 seed

    Returns:
        (HR 이미지, per-image seed) 리스트
    """
    kind = CorpusKind(kind)
    size = _check_size(size)
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")

    images = []
    for i in range(count):
        image_seed = derive_seed(seed, kind.value, i)
        rng = np.random.default_rng(image_seed)
        images.append((_GENERATORS[kind](size, rng), image_seed))
    return images


def _split_and_write(
    entries: List[ManifestEntry],
    out_dir: Path,
    test_ratio: float,
    seed: int
) -> DatasetManifest:
    manifest = DatasetManifest(entries=entries, root=out_dir)
    if test_ratio > 0:
        parts = split_manifest(manifest, {"pool": 1.0 - test_ratio, "test": test_ratio}, seed)
        manifest = merge_manifests(parts["pool"], parts["test"])
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def make_domain_corpus(
    kind: Union[CorpusKind, str],
    count: int,
    size: Tuple[int, int],
    seed: int,
    out_dir: PathLike,
    test_ratio: float = DEFAULT_TEST_RATIO,
    lossless: bool = True
) -> DatasetManifest:
    """
    절차적 target-domain 코퍼스 생성 후 pool/test로 분할

    Args:
        kind: textures, gradients, mosaics
        count: 이미지 개수
        size: HR 크기 (4의 배수)
        seed: 코퍼스 seed (이미지와 분할 모두 결정)
        out_dir: 출력 디렉토리 (manifest.csv, hr/, lr/)
        test_ratio: test split 비율
        lossless: raw 사이드카 저장 여부

    Returns:
        pool + test 항목을 담은 매니페스트
    """
    kind = CorpusKind(kind)
    if not 0.0 <= test_ratio < 1.0:
        raise ConfigError(f"test_ratio must be in [0, 1), got {test_ratio}")
    out_dir = Path(out_dir)

    entries = []
    for i, (hr, image_seed) in enumerate(generate_domain_images(kind, count, size, seed)):
        pair = LabeledPair.from_hr(hr, sample_id=f"{kind.value}_{i:05d}")
        entries.append(
            write_pair(out_dir, pair, "pool", seed=image_seed, source=kind.value, lossless=lossless)
        )

    manifest = _split_and_write(entries, out_dir, test_ratio, derive_seed(seed, "split"))
    logger.info(
        f"Domain corpus ready: kind={kind.value}, pool={len(manifest.select('pool'))}, "
        f"test={len(manifest.select('test'))}"
    )
    return manifest


def center_crop_to_multiple(image: np.ndarray, multiple: int = SCALE) -> np.ndarray:
    """H, W를 multiple의 배수로 중앙 crop"""
    h, w = image.shape[:2]
    new_h, new_w = h - h % multiple, w - w % multiple
    if new_h == 0 or new_w == 0:
        raise ConfigError(f"Image {h}x{w} is smaller than {multiple}x{multiple}")
    top, left = (h - new_h) // 2, (w - new_w) // 2
    return image[top:top + new_h, left:left + new_w]


def make_pool_from_dir(
    directory: PathLike,
    out_dir: PathLike,
    test_ratio: float = DEFAULT_TEST_RATIO,
    seed: int = 0,
    lossless: bool = False,
    patterns: Sequence[str] = ("*.png",)
) -> DatasetManifest:
    """
    사용자 PNG 디렉토리(Set5/BSD100 형태)를 같은 매니페스트 형식으로 ingest

    Args:
        directory: 입력 이미지 디렉토리
        out_dir: 출력 디렉토리
        test_ratio: test split 비율
        seed: 분할 seed
        lossless: raw 사이드카 저장 여부
        patterns: 파일 glob 패턴

    Returns:
        pool + test 매니페스트
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ManifestError(f"Not a directory: {directory}")
    if not 0.0 <= test_ratio < 1.0:
        raise ConfigError(f"test_ratio must be in [0, 1), got {test_ratio}")

    files = sorted({p for pattern in patterns for p in directory.glob(pattern)})
    if not files:
        raise ManifestError(f"No images matching {list(patterns)} in {directory}")

    out_dir = Path(out_dir)
    entries = []
    for path in files:
        hr = center_crop_to_multiple(load_image(path))
        if hr.shape[2] == 1:
            hr = np.repeat(hr, 3, axis=2)
        pair = LabeledPair.from_hr(hr, sample_id=path.stem)
        entries.append(write_pair(out_dir, pair, "pool", source=directory.name, lossless=lossless))

    manifest = _split_and_write(entries, out_dir, test_ratio, seed)
    logger.info(f"Ingested {len(manifest)} images from {directory}")
    return manifest


def default_manifest_path(out_dir: PathLike) -> Path:
    return Path(out_dir) / MANIFEST_NAME


def load_split(manifest_path: PathLike, split: str, check_files: bool = True) -> Optional[DatasetManifest]:
    """매니페스트에서 split 하나만 읽기 (없으면 None)"""
    part = read_manifest(manifest_path, check_files=check_files).select(split)
    return part if len(part) else None
