"""
Unlabeled Pool

D_U 정의와 평균 예측 분산 ⟨σ̂²⟩ 기반 샘플 점수 계산
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

from src.data.image_io import load_image
from src.data.manifest import DatasetManifest
from src.errors import DataIOError, ImageIOError, ManifestError
from src.model.network import VARIANCE_FLOOR, NetworkParams, forward

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PoolEntry:
    """pool 샘플 하나 (HR은 라벨링 oracle 용도로만 사용)"""
    sample_id: str
    lr_path: Path
    hr_path: Optional[Path] = None


@dataclass
class PoolManifest:
    """라벨 없는 pool D_U"""
    entries: List[PoolEntry]
    domain: str = ""

    def __post_init__(self):
        if not self.entries:
            raise ManifestError("Pool must contain at least one entry")
        ids = [e.sample_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ManifestError("Pool sample ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> List[str]:
        return [e.sample_id for e in self.entries]

    def get(self, sample_id: str) -> PoolEntry:
        for entry in self.entries:
            if entry.sample_id == sample_id:
                return entry
        raise KeyError(f"Sample id not in pool: {sample_id}")

    def without(self, ids) -> "PoolManifest":
        """주어진 id를 제외한 남은 pool"""
        excluded = set(ids)
        return PoolManifest(
            entries=[e for e in self.entries if e.sample_id not in excluded],
            domain=self.domain,
        )

    def content_hash(self) -> str:
        """id와 파일 이름의 sha256"""
        digest = hashlib.sha256(f"domain={self.domain}\n".encode("utf-8"))
        for entry in self.entries:
            hr_name = entry.hr_path.name if entry.hr_path else ""
            digest.update(f"{entry.sample_id},{entry.lr_path.name},{hr_name}\n".encode("utf-8"))
        return digest.hexdigest()

    @classmethod
    def from_manifest(cls, manifest: DatasetManifest, domain: str = "") -> "PoolManifest":
        entries = [
            PoolEntry(
                sample_id=e.id,
                lr_path=manifest.resolve(e.lr_path),
                hr_path=manifest.resolve(e.hr_path) if e.hr_path else None,
            )
            for e in manifest.entries
        ]
        return cls(entries=entries, domain=domain or (manifest.entries[0].source if manifest.entries else ""))


@dataclass(frozen=True)
class ScoredSample:
    """샘플 id와 평균 예측 분산"""
    sample_id: str
    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"Score for {self.sample_id} must be finite, got {self.score}")
        if self.score < VARIANCE_FLOOR:
            raise ValueError(
                f"Score for {self.sample_id} is below the variance floor: {self.score}"
            )

    def to_dict(self) -> Dict:
        return {"id": self.sample_id, "score": self.score}


def _score_entry(params: NetworkParams, entry: PoolEntry) -> ScoredSample:
    try:
        lr = load_image(entry.lr_path)
    except (DataIOError, OSError, ValueError) as e:
        raise ImageIOError(f"Cannot read LR image for sample {entry.sample_id}: {e}") from e
    pred = forward(params, lr)
    return ScoredSample(sample_id=entry.sample_id, score=pred.mean_uncertainty())


def score_pool(
    params: NetworkParams,
    pool: PoolManifest,
    n_jobs: int = 1
) -> List[ScoredSample]:
    """
    pool 전체를 추론 모드로 점수화 (ζ는 읽기 전용으로 공유)

    Args:
        params: ζ
        pool: 라벨 없는 pool
        n_jobs: 스레드 수

    Returns:
        매니페스트 순서의 ScoredSample 리스트
    """
    scores = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_score_entry)(params, entry) for entry in pool.entries
    )
    values = [s.score for s in scores]
    logger.info(
        f"Pool scored: n={len(scores)}, mean={np.mean(values):.6f}, "
        f"min={np.min(values):.6f}, max={np.max(values):.6f}"
    )
    return list(scores)
