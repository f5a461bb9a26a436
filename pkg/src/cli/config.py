"""
Experiment Configuration

한 줄에 하나씩 `key = value` (점으로 구분된 flat key) 형식의 실험 설정 파일 파싱
값은 YAML 스칼라/리스트로 해석 (예: budgets = [25, 50, 100])
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.active.pipeline import Arm, PipelineConfig
from src.errors import ConfigError, DataIOError
from src.model.trainer import TrainConfig

logger = logging.getLogger(__name__)

METRIC_NAMES = ("mse", "mae", "psnr", "ssim")
DESK_BUDGETS = [25, 50, 100, 200]

PathLike = Union[str, Path]


class PathsConfig(BaseModel):
    """입출력 경로"""
    sim: str = Field(description="합성 데이터셋(D_SL) 매니페스트")
    domain: str = Field(description="도메인 pool/test 매니페스트")
    out: str = Field(default="runs/experiment", description="결과 디렉토리")


class ExperimentConfig(BaseModel):
    """multi-arm, multi-budget, multi-seed 실험 설정"""
    paths: PathsConfig
    dataset: str = ""
    arms: List[Arm] = Field(default_factory=lambda: list(Arm))
    budgets: List[int] = Field(default_factory=lambda: list(DESK_BUDGETS))
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    rounds: int = Field(default=1, ge=1)
    width: int = Field(default=32, ge=1)
    depth: int = Field(default=4, ge=1)
    pretrain: TrainConfig = Field(default_factory=TrainConfig)
    finetune: TrainConfig = Field(default_factory=lambda: TrainConfig(lr=1e-4, epochs=5))
    metrics: List[str] = Field(default_factory=lambda: list(METRIC_NAMES))
    score_jobs: int = Field(default=1, ge=1)

    @field_validator("arms")
    @classmethod
    def _at_least_one_arm(cls, value):
        if not value:
            raise ValueError("At least one arm is required")
        if len(set(value)) != len(value):
            raise ValueError(f"Duplicate arms: {[a.value for a in value]}")
        return value

    @field_validator("budgets")
    @classmethod
    def _budgets_ascending(cls, value):
        if not value:
            raise ValueError("At least one budget is required")
        if any(b < 1 for b in value):
            raise ValueError(f"Budgets must be >= 1, got {value}")
        if any(a >= b for a, b in zip(value, value[1:])):
            raise ValueError(f"Budgets must be strictly ascending, got {value}")
        return value

    @field_validator("seeds")
    @classmethod
    def _at_least_one_seed(cls, value):
        if not value:
            raise ValueError("At least one seed is required")
        if any(s < 0 for s in value) or len(set(value)) != len(value):
            raise ValueError(f"Seeds must be unique and non-negative, got {value}")
        return value

    @field_validator("metrics")
    @classmethod
    def _known_metrics(cls, value):
        unknown = [m for m in value if m not in METRIC_NAMES]
        if unknown:
            raise ValueError(f"Unknown metrics {unknown}; choose from {list(METRIC_NAMES)}")
        return value

    def check_pool_size(self, pool_size: int) -> None:
        """가장 큰 예산이 pool 크기 이하인지 확인"""
        if self.budgets[-1] > pool_size:
            raise ConfigError(
                f"Budget {self.budgets[-1]} exceeds the pool size {pool_size}"
            )

    def cell(self, arm: Arm, budget: int, seed: int, out_dir: PathLike, pretrained: PathLike) -> PipelineConfig:
        """(arm, budget, seed) cell 설정 생성"""
        return PipelineConfig(
            arm=arm,
            budget=budget,
            seed=seed,
            rounds=min(self.rounds, budget),
            dataset=self.dataset,
            domain_manifest=self.paths.domain,
            sim_manifest=self.paths.sim,
            out_dir=str(out_dir),
            pretrained_checkpoint=str(pretrained),
            width=self.width,
            depth=self.depth,
            pretrain=self.pretrain,
            finetune=self.finetune,
            n_jobs=self.score_jobs,
        )


def parse_flat_config(text: str, source: str = "<config>") -> Dict[str, Any]:
    """
    flat dotted-key 텍스트 → 중첩 dict

    Args:
        text: 설정 파일 내용
        source: 오류 메시지용 이름

    Returns:
        중첩 dict (예: {"pretrain": {"lr": 0.001}})
    """
    nested: Dict[str, Any] = {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{raw}'")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        seen.add(key)

        value = value.split(" #", 1)[0].strip()
        try:
            parsed = yaml.safe_load(value) if value else None
        except yaml.YAMLError as e:
            raise ConfigError(f"{source}:{lineno}: cannot parse value for '{key}': {e}") from e

        node = nested
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{source}:{lineno}: '{part}' is both a value and a section")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"{source}:{lineno}: '{key}' is both a value and a section")
        node[parts[-1]] = parsed
    return nested


def flatten_config(values: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """중첩 dict → dotted key dict (parse_flat_config의 역)"""
    flat: Dict[str, Any] = {}
    for key, value in values.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten_config(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def format_flat_config(values: Dict[str, Any]) -> str:
    """중첩 dict → `key = value` 텍스트 (값은 JSON 표기라 parse_flat_config로 다시 읽힘)"""
    flat = flatten_config(values)
    return "".join(f"{key} = {json.dumps(flat[key])}\n" for key in sorted(flat))


def load_experiment_config(path: PathLike) -> ExperimentConfig:
    """설정 파일 로드 및 검증"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataIOError(f"Cannot read config {path}: {e}") from e
    try:
        cfg = ExperimentConfig.model_validate(parse_flat_config(text, source=str(path)))
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config {path}: {e}") from e
    logger.info(
        f"Config loaded: {path} (arms={[a.value for a in cfg.arms]}, "
        f"budgets={cfg.budgets}, seeds={cfg.seeds})"
    )
    return cfg
