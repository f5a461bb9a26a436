"""
Acquisition Strategies

예산 K 아래에서의 top-K 불확실성 선택과 무작위 선택, SelectionResult 텍스트 포맷
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from src.active.pool import PoolManifest, ScoredSample
from src.data.image_io import atomic_write_text
from src.errors import ConfigError, ManifestError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class StrategyKind(Enum):
    """선택 전략 종류"""
    UNCERTAINTY_TOPK = "uncertainty_topk"
    RANDOM = "random"


@dataclass(frozen=True)
class AcquisitionStrategy:
    """Q_{K,φ}: 전략 종류, 예산 K, (random이면) seed"""
    kind: StrategyKind
    k: int
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind is StrategyKind.RANDOM and self.seed is None:
            raise ConfigError("Random selection needs a seed")

    def check_budget(self, n: int) -> None:
        check_budget(self.k, n)

    def describe(self) -> str:
        if self.kind is StrategyKind.RANDOM:
            return f"{self.kind.value}(seed={self.seed})"
        return self.kind.value


@dataclass
class SelectionResult:
    """선택된 subset D_U^K"""
    ids: List[str]
    scores: List[Optional[float]]
    strategy: str
    pool_hash: str = ""
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.ids) != len(self.scores):
            raise ValueError(f"{len(self.ids)} ids but {len(self.scores)} scores")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("Selected ids must be unique")

    @property
    def k(self) -> int:
        return len(self.ids)

    def to_dict(self) -> Dict:
        return {
            "strategy": self.strategy,
            "k": self.k,
            "pool_hash": self.pool_hash,
            "ids": list(self.ids),
            "scores": list(self.scores),
        }


def check_budget(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ConfigError(f"Budget K must satisfy 1 <= K <= N={n}, got {k}")


def top_k(
    scores: Sequence[ScoredSample],
    k: int,
    pool_hash: str = ""
) -> SelectionResult:
    """
    점수 상위 K개 (동점은 id 오름차순)

    Args:
        scores: pool 점수
        k: 예산
        pool_hash: pool 매니페스트 digest

    Returns:
        점수 내림차순, id 오름차순으로 정렬된 SelectionResult
    """
    check_budget(k, len(scores))
    ranked = sorted(scores, key=lambda s: (-s.score, s.sample_id))[:k]
    return SelectionResult(
        ids=[s.sample_id for s in ranked],
        scores=[s.score for s in ranked],
        strategy=StrategyKind.UNCERTAINTY_TOPK.value,
        pool_hash=pool_hash,
    )


def select_random(
    pool: Union[PoolManifest, Sequence[str]],
    k: int,
    seed: int,
    pool_hash: Optional[str] = None
) -> SelectionResult:
    """
    비복원 균등 무작위 선택

    Args:
        pool: PoolManifest 또는 id 목록
        k: 예산
        seed: 선택 seed
        pool_hash: 지정하지 않으면 PoolManifest에서 계산

    Returns:
        추출 순서의 SelectionResult
    """
    if isinstance(pool, PoolManifest):
        ids = pool.ids
        pool_hash = pool_hash if pool_hash is not None else pool.content_hash()
    else:
        ids = list(pool)
    check_budget(k, len(ids))

    chosen = np.random.default_rng(seed).choice(len(ids), size=k, replace=False)
    return SelectionResult(
        ids=[ids[i] for i in chosen],
        scores=[None] * k,
        strategy=AcquisitionStrategy(StrategyKind.RANDOM, k, seed).describe(),
        pool_hash=pool_hash or "",
    )


def apply_strategy(
    strategy: AcquisitionStrategy,
    pool: PoolManifest,
    scores: Optional[Sequence[ScoredSample]] = None
) -> SelectionResult:
    """전략 종류에 따라 선택 실행"""
    strategy.check_budget(len(pool))
    if strategy.kind is StrategyKind.RANDOM:
        return select_random(pool, strategy.k, strategy.seed)
    if scores is None:
        raise ConfigError("Uncertainty selection needs pool scores")
    return top_k(scores, strategy.k, pool_hash=pool.content_hash())


def format_selection(result: SelectionResult) -> str:
    lines = [
        f"strategy={result.strategy}",
        f"k={result.k}",
        f"pool_hash={result.pool_hash}",
        "id,score",
    ]
    for sample_id, score in zip(result.ids, result.scores):
        lines.append(f"{sample_id},{'' if score is None else repr(float(score))}")
    return "\n".join(lines) + "\n"


def write_selection(result: SelectionResult, path: PathLike) -> Path:
    """SelectionResult를 텍스트로 저장 (임시 파일 + rename)"""
    written = atomic_write_text(path, format_selection(result))
    logger.info(f"Selection written: {written} (k={result.k}, strategy={result.strategy})")
    return written


def read_selection(path: PathLike) -> SelectionResult:
    """write_selection 포맷 파싱"""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ManifestError(f"Cannot read selection {path}: {e}") from e

    header = {}
    index = 0
    while index < len(lines) and lines[index] != "id,score":
        key, sep, value = lines[index].partition("=")
        if not sep:
            raise ManifestError(f"{path}: malformed header line '{lines[index]}'")
        header[key.strip()] = value.strip()
        index += 1
    if index == len(lines):
        raise ManifestError(f"{path}: missing 'id,score' header")

    ids, scores = [], []
    for line in lines[index + 1:]:
        if not line.strip():
            continue
        sample_id, _, score = line.rpartition(",")
        ids.append(sample_id)
        scores.append(float(score) if score else None)

    result = SelectionResult(
        ids=ids,
        scores=scores,
        strategy=header.get("strategy", ""),
        pool_hash=header.get("pool_hash", ""),
    )
    if "k" in header and int(header["k"]) != result.k:
        raise ManifestError(f"{path}: header k={header['k']} but {result.k} rows")
    return result
