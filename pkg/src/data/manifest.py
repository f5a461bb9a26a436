"""
Dataset Manifest

D_SL / D_U / test 분할을 디스크에 기록하는 매니페스트 (CSV 본문 + schema 헤더)
"""

import hashlib
import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from src.data.image_io import atomic_write_text, load_image, save_image, sidecar_path
from src.data.transforms import LabeledPair
from src.errors import ConfigError, ManifestError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COLUMNS = ["id", "split", "lr_path", "hr_path", "seed", "source"]
SPLITS = ("train", "pool", "test")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ManifestEntry:
    """매니페스트 한 줄 (경로는 매니페스트 디렉토리 기준 상대 경로)"""
    id: str
    split: str
    lr_path: str
    hr_path: Optional[str] = None
    seed: Optional[int] = None
    source: str = ""

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "split": self.split,
            "lr_path": self.lr_path,
            "hr_path": self.hr_path or "",
            "seed": "" if self.seed is None else str(self.seed),
            "source": self.source,
        }


@dataclass
class DatasetManifest:
    """데이터셋 매니페스트"""
    entries: List[ManifestEntry]
    schema_version: int = SCHEMA_VERSION
    root: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.id in seen:
                raise ManifestError(f"Duplicate sample id in manifest: {entry.id}")
            if entry.split not in SPLITS:
                raise ManifestError(f"Unknown split '{entry.split}' for id {entry.id}")
            seen.add(entry.id)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> List[str]:
        return [e.id for e in self.entries]

    def get(self, sample_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.id == sample_id:
                return entry
        raise KeyError(f"Sample id not in manifest: {sample_id}")

    def select(self, split: str) -> "DatasetManifest":
        """특정 split만 남긴 매니페스트"""
        return DatasetManifest(
            entries=[e for e in self.entries if e.split == split],
            schema_version=self.schema_version,
            root=self.root,
        )

    def subset(self, ids: List[str]) -> "DatasetManifest":
        """주어진 id 순서대로 부분 매니페스트"""
        return DatasetManifest(
            entries=[self.get(i) for i in ids],
            schema_version=self.schema_version,
            root=self.root,
        )

    def resolve(self, relative: str) -> Path:
        path = Path(relative)
        return path if path.is_absolute() else self.root / path

    def load_lr(self, entry: ManifestEntry) -> np.ndarray:
        return load_image(self.resolve(entry.lr_path))

    def load_pair(self, entry: ManifestEntry) -> LabeledPair:
        if not entry.hr_path:
            raise ManifestError(f"Entry {entry.id} has no HR path")
        return LabeledPair(
            lr=self.load_lr(entry),
            hr=load_image(self.resolve(entry.hr_path)),
            sample_id=entry.id,
            source=entry.source,
        )

    def load_pairs(self) -> List[LabeledPair]:
        return [self.load_pair(e) for e in self.entries]

    def check_files(self) -> None:
        """참조 파일 존재 확인"""
        for entry in self.entries:
            for rel in (entry.lr_path, entry.hr_path):
                if rel and not self.resolve(rel).exists():
                    raise ManifestError(
                        f"Missing file for {entry.id}: {self.resolve(rel)}"
                    )

    def content_hash(self) -> str:
        """id와 경로의 sha256 (재현성 감사용)"""
        digest = hashlib.sha256()
        for entry in self.entries:
            line = ",".join(entry.to_dict()[c] for c in COLUMNS)
            digest.update(line.encode("utf-8") + b"\n")
        return digest.hexdigest()

    def data_digest(self) -> str:
        """content_hash에 참조 파일(무손실 사이드카 포함) 바이트까지 더한 sha256"""
        digest = hashlib.sha256(self.content_hash().encode("ascii"))
        for entry in self.entries:
            for rel in (entry.lr_path, entry.hr_path):
                if not rel:
                    continue
                for path in (self.resolve(rel), sidecar_path(self.resolve(rel))):
                    if path.exists():
                        digest.update(path.read_bytes())
        return digest.hexdigest()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([e.to_dict() for e in self.entries], columns=COLUMNS)


def write_manifest(manifest: DatasetManifest, path: PathLike) -> Path:
    """
    매니페스트 저장 (첫 줄 '# schema_version=N', 이후 CSV)

    Args:
        manifest: 저장할 매니페스트
        path: 출력 경로

    Returns:
        기록된 경로
    """
    buffer = io.StringIO()
    buffer.write(f"# schema_version={manifest.schema_version}\n")
    manifest.to_frame().to_csv(buffer, index=False, lineterminator="\n")
    written = atomic_write_text(path, buffer.getvalue())
    logger.info(f"Manifest written: {written} ({len(manifest)} entries)")
    return written


def read_manifest(path: PathLike, check_files: bool = True) -> DatasetManifest:
    """
    매니페스트 로드

    Args:
        path: 매니페스트 경로
        check_files: 참조 파일 존재 확인 여부

    Returns:
        DatasetManifest (root = 매니페스트 디렉토리)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestError(f"Cannot read manifest {path}: {e}") from e

    header, _, body = text.partition("\n")
    if not header.startswith("# schema_version="):
        raise ManifestError(f"{path}: missing schema header")
    try:
        version = int(header.split("=", 1)[1])
    except ValueError as e:
        raise ManifestError(f"{path}: bad schema header '{header}'") from e
    if version != SCHEMA_VERSION:
        raise ManifestError(f"{path}: unsupported schema version {version}")

    frame = pd.read_csv(io.StringIO(body), dtype=str, keep_default_na=False)
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise ManifestError(f"{path}: missing columns {missing}")

    entries = [
        ManifestEntry(
            id=row["id"],
            split=row["split"],
            lr_path=row["lr_path"],
            hr_path=row["hr_path"] or None,
            seed=int(row["seed"]) if row["seed"] else None,
            source=row["source"],
        )
        for row in frame.to_dict(orient="records")
    ]
    manifest = DatasetManifest(entries=entries, schema_version=version, root=path.parent)
    if check_files:
        manifest.check_files()
    return manifest


def split_manifest(
    manifest: DatasetManifest,
    ratios: Mapping[str, float],
    seed: int
) -> Dict[str, DatasetManifest]:
    """
    seed 고정 셔플로 서로소/전체를 덮는 분할 생성

    Args:
        manifest: 원본 매니페스트
        ratios: split 이름 → 비율 (합 1)
        seed: 셔플 seed

    Returns:
        split 이름 → 매니페스트 (각 split 내부는 원래 순서 유지)
    """
    if not ratios:
        raise ConfigError("At least one split ratio is required")
    for name, ratio in ratios.items():
        if name not in SPLITS:
            raise ConfigError(f"Unknown split '{name}'. Supported: {list(SPLITS)}")
        if ratio < 0:
            raise ConfigError(f"Split ratio must be >= 0, got {name}={ratio}")
    total = sum(ratios.values())
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"Split ratios must sum to 1, got {total}")

    n = len(manifest)
    names = list(ratios.keys())
    exact = np.array([ratios[k] * n for k in names])
    counts = np.floor(exact).astype(int)
    remainder = n - counts.sum()
    # 나머지는 소수부가 큰 split부터 (동률이면 먼저 적힌 split)
    order = sorted(range(len(names)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1

    for name, count in zip(names, counts):
        if ratios[name] > 0 and count == 0:
            raise ConfigError(
                f"Split '{name}' would be empty (ratio={ratios[name]}, N={n})"
            )

    permutation = np.random.default_rng(seed).permutation(n)
    result = {}
    start = 0
    for name, count in zip(names, counts):
        chosen = sorted(permutation[start:start + count].tolist())
        start += count
        result[name] = DatasetManifest(
            entries=[replace(manifest.entries[i], split=name) for i in chosen],
            schema_version=manifest.schema_version,
            root=manifest.root,
        )

    logger.info(
        "Manifest split: " + ", ".join(f"{k}={len(v)}" for k, v in result.items())
    )
    return result


def merge_manifests(*parts: DatasetManifest) -> DatasetManifest:
    """같은 root를 공유하는 매니페스트 병합"""
    if not parts:
        raise ManifestError("Nothing to merge")
    entries = [e for part in parts for e in part.entries]
    return DatasetManifest(entries=entries, root=parts[0].root)


def write_pair(
    out_dir: PathLike,
    pair: LabeledPair,
    split: str,
    seed: Optional[int] = None,
    source: str = "",
    lossless: bool = False
) -> ManifestEntry:
    """
    HR/LR 이미지를 out_dir/hr, out_dir/lr 아래에 저장하고 매니페스트 항목 생성

    Args:
        out_dir: 데이터셋 루트 (매니페스트가 놓일 디렉토리)
        pair: 저장할 쌍 (sample_id가 파일 이름)
        split: train / pool / test
        seed: 재생성용 per-pair seed
        source: 생성 모델 또는 코퍼스 태그
        lossless: raw 사이드카 동시 저장 여부

    Returns:
        상대 경로를 담은 ManifestEntry
    """
    if not pair.sample_id:
        raise ManifestError("Pair needs a sample id to be written")
    out_dir = Path(out_dir)
    hr_rel = f"hr/{pair.sample_id}.png"
    lr_rel = f"lr/{pair.sample_id}.png"
    save_image(out_dir / hr_rel, pair.hr, lossless=lossless)
    save_image(out_dir / lr_rel, pair.lr, lossless=lossless)
    return ManifestEntry(
        id=pair.sample_id,
        split=split,
        lr_path=lr_rel,
        hr_path=hr_rel,
        seed=seed,
        source=source,
    )
