"""
USIM-DAL Pipeline

실험 arm별 흐름:
- Random:     도메인 pool에서 무작위 K개를 라벨링해 처음부터 학습
- SIM:        합성 데이터(D_SL) 사전학습만
- SIM+Random: 사전학습 후 무작위 K개로 미세조정
- USIM-DAL:   사전학습 후 pool 점수화, top-K 선택, 미세조정
"""

import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from src.active.pool import PoolManifest, score_pool
from src.active.selection import (
    SelectionResult,
    StrategyKind,
    check_budget,
    select_random,
    top_k,
    write_selection,
)
from src.data.image_io import atomic_write_text, load_image
from src.data.manifest import DatasetManifest, read_manifest
from src.data.transforms import LabeledPair
from src.errors import ConfigError, DataIOError, LabelingOracleError, ManifestError
from src.metrics.quality import MetricReport, evaluate_predictions
from src.model.checkpoint import encode_params, load_checkpoint, save_checkpoint
from src.model.network import NetworkDescriptor, NetworkParams
from src.model.trainer import TrainConfig, finetune, train
from src.seeding import derive_seed

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
SELECTION_NAME = "selection.txt"
FINAL_CHECKPOINT = "final.udc"
PRETRAIN_CHECKPOINT = "pretrain.udc"
PRETRAIN_KEY_SUFFIX = ".key"


class Arm(Enum):
    """실험 arm"""
    RANDOM = "random"
    SIM = "sim"
    SIM_RANDOM = "sim_random"
    USIM_DAL = "usim_dal"

    @property
    def pretrained(self) -> bool:
        return self is not Arm.RANDOM

    @property
    def selects(self) -> bool:
        return self is not Arm.SIM


class PipelineConfig(BaseModel):
    """실험 cell 하나 (arm, budget, seed)의 설정"""
    arm: Arm
    budget: int = Field(ge=1)
    seed: int = Field(default=0, ge=0)
    rounds: int = Field(default=1, ge=1)
    dataset: str = ""
    domain_manifest: str
    sim_manifest: Optional[str] = None
    out_dir: str
    pretrained_checkpoint: Optional[str] = None
    width: int = Field(default=32, ge=1)
    depth: int = Field(default=4, ge=1)
    pretrain: TrainConfig = Field(default_factory=TrainConfig)
    finetune: TrainConfig = Field(default_factory=lambda: TrainConfig(lr=1e-4, epochs=5))
    eval_batch_size: int = Field(default=16, ge=1)
    n_jobs: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_rounds(self) -> "PipelineConfig":
        if self.rounds > self.budget:
            raise ValueError(f"rounds ({self.rounds}) must not exceed budget ({self.budget})")
        return self

    def descriptor(self) -> NetworkDescriptor:
        return NetworkDescriptor(width=self.width, depth=self.depth)


class SelectionBlock(BaseModel):
    """리포트에 기록되는 선택 결과"""
    strategy: str
    k: int
    pool_hash: str
    ids: List[str]
    scores: List[Optional[float]]

    @classmethod
    def from_result(cls, result: SelectionResult) -> "SelectionBlock":
        return cls(
            strategy=result.strategy,
            k=result.k,
            pool_hash=result.pool_hash,
            ids=list(result.ids),
            scores=list(result.scores),
        )


class RunReport(BaseModel):
    """실험 cell 결과 (타임스탬프 없음)"""
    dataset: str
    arm: Arm
    budget: int
    seed: int
    rounds: int = 1
    stages: List[str]
    metrics: MetricReport
    selection: Optional[SelectionBlock] = None
    pretrain_sha256: Optional[str] = None
    final_sha256: str

    def as_row(self) -> Dict:
        """실험 CSV 한 줄"""
        return {
            "dataset": self.dataset,
            "arm": self.arm.value,
            "budget": self.budget,
            "seed": self.seed,
            **self.metrics.as_row(),
        }


def params_digest(params: NetworkParams) -> str:
    """UDC1 직렬화 바이트의 sha256"""
    return hashlib.sha256(encode_params(params)).hexdigest()


def round_sizes(budget: int, rounds: int) -> List[int]:
    """예산 K를 R개 라운드로 분할 (크기 차이 최대 1)"""
    if not 1 <= rounds <= budget:
        raise ConfigError(f"rounds must be in [1, {budget}], got {rounds}")
    base, extra = divmod(budget, rounds)
    return [base + (1 if i < extra else 0) for i in range(rounds)]


def label_selection(pool: PoolManifest, ids: List[str]) -> List[LabeledPair]:
    """
    라벨링 oracle: 선택된 id의 보류된 HR을 읽어 학습 쌍 구성

    Args:
        pool: HR 경로를 가진 pool
        ids: 선택된 id

    Returns:
        LabeledPair 목록 (ids 순서)
    """
    pairs = []
    for sample_id in ids:
        entry = pool.get(sample_id)
        if entry.hr_path is None or not entry.hr_path.exists():
            raise LabelingOracleError(f"Selected sample {sample_id} has no HR label")
        pairs.append(LabeledPair(
            lr=load_image(entry.lr_path),
            hr=load_image(entry.hr_path),
            sample_id=sample_id,
            source=pool.domain,
        ))
    return pairs


def load_domain(path: str) -> Tuple[PoolManifest, DatasetManifest]:
    """도메인 매니페스트 → (pool, test split)"""
    manifest = read_manifest(path)
    pool_part = manifest.select("pool")
    test_part = manifest.select("test")
    if not len(pool_part):
        raise ManifestError(f"{path}: no 'pool' entries")
    if not len(test_part):
        raise ManifestError(f"{path}: no 'test' entries")
    return PoolManifest.from_manifest(pool_part), test_part


def pretrain_key(cfg: PipelineConfig) -> str:
    """
    ζ_SL 캐시 키: 사전학습 설정, 네트워크 크기, seed, D_SL 학습 split의 데이터 digest

    Args:
        cfg: cell 설정 (sim_manifest 필요)

    Returns:
        sha256 hex digest
    """
    sim = read_manifest(cfg.sim_manifest).select("train")
    payload = {
        "pretrain": cfg.pretrain.model_dump(mode="json", exclude={"checkpoint_path"}),
        "width": cfg.width,
        "depth": cfg.depth,
        "seed": cfg.seed,
        "sim": sim.data_digest(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def ensure_pretrained(cfg: PipelineConfig) -> Tuple[NetworkParams, Path]:
    """
    ζ_SL 확보: 캐시 키가 일치하는 체크포인트가 있으면 로드, 아니면 D_SL로 학습 후 저장

    Args:
        cfg: cell 설정 (pretrained_checkpoint가 seed별 캐시 경로)

    Returns:
        (ζ_SL, 체크포인트 경로)
    """
    path = Path(cfg.pretrained_checkpoint or Path(cfg.out_dir) / PRETRAIN_CHECKPOINT)
    if not cfg.sim_manifest:
        # 외부에서 받은 체크포인트는 그대로 사용
        if path.exists():
            return load_checkpoint(path), path
        raise ConfigError("Pretraining needs a synthetic dataset manifest (sim_manifest)")

    key = pretrain_key(cfg)
    key_path = path.with_suffix(PRETRAIN_KEY_SUFFIX)
    if path.exists():
        if key_path.exists() and key_path.read_text(encoding="utf-8").strip() == key:
            return load_checkpoint(path), path
        logger.warning(f"Cached checkpoint {path} was built with other pretraining settings, retraining")

    sim = read_manifest(cfg.sim_manifest).select("train")
    if not len(sim):
        raise ManifestError(f"{cfg.sim_manifest}: no 'train' entries")
    train_cfg = cfg.pretrain.model_copy(update={"seed": derive_seed(cfg.seed, "pretrain")})
    logger.info(f"Pretraining on {len(sim)} synthetic pairs (seed={cfg.seed})")
    params = train(sim.load_pairs(), train_cfg, descriptor=cfg.descriptor())
    save_checkpoint(params, path)
    atomic_write_text(key_path, key + "\n")
    return params, path


def _finetune_cfg(cfg: PipelineConfig) -> TrainConfig:
    return cfg.finetune.model_copy(update={"seed": derive_seed(cfg.seed, "finetune")})


def _random_selection(cfg: PipelineConfig, pool: PoolManifest) -> SelectionResult:
    return select_random(pool, cfg.budget, seed=derive_seed(cfg.seed, "random", cfg.budget))


def _uncertainty_rounds(
    cfg: PipelineConfig,
    params_sl: NetworkParams,
    pool: PoolManifest
) -> Tuple[SelectionResult, NetworkParams]:
    """score → top-K → 미세조정을 라운드 수만큼 반복 (매 라운드 ζ_SL에서 누적 집합으로)"""
    remaining = pool
    current = params_sl
    ids: List[str] = []
    scores: List[Optional[float]] = []
    for index, size in enumerate(round_sizes(cfg.budget, cfg.rounds)):
        scored = score_pool(current, remaining, n_jobs=cfg.n_jobs)
        picked = top_k(scored, size, pool_hash=remaining.content_hash())
        ids.extend(picked.ids)
        scores.extend(picked.scores)
        current = finetune(params_sl, label_selection(pool, ids), _finetune_cfg(cfg))
        logger.info(f"Round {index + 1}/{cfg.rounds}: selected {size}, labelled total {len(ids)}")
        if index + 1 < cfg.rounds:
            remaining = remaining.without(picked.ids)

    strategy = StrategyKind.UNCERTAINTY_TOPK.value
    if cfg.rounds > 1:
        strategy = f"{strategy}(rounds={cfg.rounds})"
    selection = SelectionResult(ids=ids, scores=scores, strategy=strategy, pool_hash=pool.content_hash())
    return selection, current


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """
    arm별 파이프라인 실행 후 test split 평가, 리포트 저장

    Args:
        cfg: cell 설정

    Returns:
        RunReport (out_dir/report.json에도 기록)
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    logger.info("=" * 50)
    logger.info(f"Pipeline: arm={cfg.arm.value}, budget={cfg.budget}, seed={cfg.seed}")
    logger.info("=" * 50)

    pool, test_part = load_domain(cfg.domain_manifest)
    if cfg.arm.selects:
        check_budget(cfg.budget, len(pool))

    stages: List[str] = []
    selection: Optional[SelectionResult] = None
    params_sl: Optional[NetworkParams] = None

    if cfg.arm.pretrained:
        params_sl, _ = ensure_pretrained(cfg)
        stages.append("pretrain")
    sl_digest = params_digest(params_sl) if params_sl is not None else None

    if cfg.arm is Arm.SIM:
        params = params_sl
    elif cfg.arm is Arm.RANDOM:
        selection = _random_selection(cfg, pool)
        stages += ["select", "train"]
        scratch_cfg = cfg.pretrain.model_copy(update={"seed": derive_seed(cfg.seed, "scratch")})
        params = train(label_selection(pool, selection.ids), scratch_cfg, descriptor=cfg.descriptor())
    elif cfg.arm is Arm.SIM_RANDOM:
        selection = _random_selection(cfg, pool)
        stages += ["select", "finetune"]
        params = finetune(params_sl, label_selection(pool, selection.ids), _finetune_cfg(cfg))
    else:
        stages += ["score", "select", "finetune"]
        selection, params = _uncertainty_rounds(cfg, params_sl, pool)

    if params_sl is not None and params_digest(params_sl) != sl_digest:
        raise RuntimeError("Pretrained parameters were modified during the run")

    test_pairs = test_part.load_pairs()
    metrics = evaluate_predictions(params, test_pairs, batch_size=cfg.eval_batch_size)
    stages.append("evaluate")

    save_checkpoint(params, out_dir / FINAL_CHECKPOINT)
    if selection is not None:
        write_selection(selection, out_dir / SELECTION_NAME)

    report = RunReport(
        dataset=cfg.dataset or pool.domain or "domain",
        arm=cfg.arm,
        budget=cfg.budget,
        seed=cfg.seed,
        rounds=cfg.rounds if cfg.arm is Arm.USIM_DAL else 1,
        stages=stages,
        metrics=metrics,
        selection=SelectionBlock.from_result(selection) if selection is not None else None,
        pretrain_sha256=sl_digest,
        final_sha256=params_digest(params),
    )
    write_report(report, out_dir / REPORT_NAME)
    logger.info(
        f"Pipeline done: arm={cfg.arm.value}, budget={cfg.budget}, seed={cfg.seed}, "
        f"PSNR={metrics.psnr:.4f}"
    )
    return report


def write_report(report: RunReport, path) -> Path:
    """RunReport JSON 저장 (임시 파일 + rename)"""
    return atomic_write_text(path, report.model_dump_json(indent=2) + "\n")


def read_report(path) -> RunReport:
    path = Path(path)
    try:
        return RunReport.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DataIOError(f"Cannot read report {path}: {e}") from e
