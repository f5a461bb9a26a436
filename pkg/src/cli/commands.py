"""
CLI Subcommands

gen, corpus, pretrain, score, select, finetune, eval, diagnose, experiment
종료 코드: 0 성공, 2 인자 오류, 3 IO 오류, 4 수치 오류
"""

import argparse
import logging
import os
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.active.pipeline import (
    PRETRAIN_CHECKPOINT,
    Arm,
    PipelineConfig,
    ensure_pretrained,
    label_selection,
    load_domain,
    run_pipeline,
)
from src.active.pool import PoolManifest, ScoredSample, score_pool
from src.active.selection import (
    AcquisitionStrategy,
    StrategyKind,
    apply_strategy,
    read_selection,
    write_selection,
)
from src.cli.config import format_flat_config, load_experiment_config
from src.cli.report import (
    append_result,
    check_ordering,
    completed_cells,
    read_results,
    write_ordering,
    write_summary,
)
from src.cli.tracking import ExperimentTracker
from src.data.corpus import CorpusKind, default_manifest_path, make_domain_corpus, make_pool_from_dir
from src.data.image_io import atomic_write_text, save_image
from src.data.manifest import read_manifest
from src.data.transforms import LabeledPair, upsample_nearest_4x
from src.errors import EXIT_OK, EXIT_UNEXPECTED, ConfigError, ManifestError, exit_code_for
from src.metrics.diagnostics import error_map, uncertainty_diagnostics, write_diagnostics
from src.metrics.shift import compare_uncertainty_distributions
from src.metrics.quality import evaluate_predictions
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.model.network import NetworkDescriptor, PredictiveOutput, predict_in_chunks
from src.model.trainer import TrainConfig, finetune, train
from src.simgen.generator import gen_dataset
from src.simgen.params import GeneratorConfig

logger = logging.getLogger(__name__)

RESULTS_NAME = "results.csv"
SUMMARY_NAME = "summary.csv"
RESOLVED_CONFIG_NAME = "experiment.resolved.cfg"
ORDERING_NAME = "ordering.yaml"
ORDERED_ARMS = (Arm.SIM, Arm.SIM_RANDOM, Arm.USIM_DAL)
DIAGNOSTICS_NAME = "diagnostics.yaml"
LOG_LEVEL_ENV = "USIMDAL_LOG_LEVEL"


# =========================================================
# Argument parsing
# =========================================================

def parse_size(text: str) -> Tuple[int, int]:
    """'64' 또는 '64x48' → (H, W)"""
    try:
        parts = [int(v) for v in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid size '{text}'")
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise argparse.ArgumentTypeError(f"Invalid size '{text}'")


def parse_mix(text: str) -> Tuple[float, float, float]:
    """'0,0,1' → (spectrum, wmm, combined) 확률"""
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid model mix '{text}'")
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"Model mix needs 3 values, got '{text}'")
    return values


def _common_args() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed")
    common.add_argument("--out", default=None, help="출력 경로")
    common.add_argument("--config", default=None, help="실험 설정 파일")
    common.add_argument("--resume", action="store_true", help="완료된 cell 건너뛰기")
    common.add_argument("--parallel", type=int, default=1, help="동시 실행 cell 수")
    return common


def _add_train_args(parser: argparse.ArgumentParser, epochs: int, lr: float) -> None:
    parser.add_argument("--epochs", type=int, default=epochs)
    parser.add_argument("--lr", type=float, default=lr)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--max-steps", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usimdal",
        description="Uncertainty-driven active learning lab for probabilistic super-resolution"
    )
    parser.add_argument(
        "--log-level",
        default=os.environ.get(LOG_LEVEL_ENV, "INFO"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    common = _common_args()
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="합성 데이터셋 D_SL 생성")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--size", type=parse_size, default=(64, 64))
    p.add_argument("--mix", type=parse_mix, default=(0.0, 0.0, 1.0))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-lossless", dest="lossless", action="store_false")

    p = sub.add_parser("corpus", parents=[common], help="도메인 pool/test 코퍼스 생성")
    p.add_argument("--kind", choices=[k.value for k in CorpusKind], default=CorpusKind.TEXTURES.value)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--size", type=parse_size, default=(64, 64))
    p.add_argument("--test-ratio", type=float, default=0.2)
    p.add_argument("--from-dir", default=None, help="PNG 디렉토리 ingest")

    p = sub.add_parser("pretrain", parents=[common], help="D_SL 사전학습")
    p.add_argument("--data", required=True, help="합성 데이터셋 매니페스트")
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--depth", type=int, default=4)
    _add_train_args(p, epochs=10, lr=1e-3)

    p = sub.add_parser("score", parents=[common], help="pool 불확실성 점수화")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pool", required=True, help="도메인 매니페스트")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("select", parents=[common], help="예산 K 선택")
    p.add_argument("--pool", required=True, help="도메인 매니페스트")
    p.add_argument("--k", type=int, required=True)
    p.add_argument(
        "--strategy",
        choices=[s.value for s in StrategyKind],
        default=StrategyKind.UNCERTAINTY_TOPK.value,
    )
    p.add_argument("--scores", default=None, help="score 명령의 CSV")

    p = sub.add_parser("finetune", parents=[common], help="선택 subset으로 미세조정")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pool", required=True, help="도메인 매니페스트")
    p.add_argument("--selection", required=True)
    _add_train_args(p, epochs=5, lr=1e-4)

    p = sub.add_parser("eval", parents=[common], help="test split 평가")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")

    p = sub.add_parser("diagnose", parents=[common], help="불확실성 진단 및 패널")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--reference", default=None, help="불확실성 분포를 비교할 기준 매니페스트 (예: D_SL)")
    p.add_argument("--reference-split", default="train")

    p = sub.add_parser("experiment", parents=[common], help="arm × budget × seed sweep")
    p.add_argument("--mlflow", action="store_true", help="MLflow 기록 (설치된 경우)")

    return parser


def _out(args, default: str) -> Path:
    return Path(args.out or default)


def _pool(manifest_path: str) -> PoolManifest:
    pool, _ = load_domain(manifest_path)
    return pool


def _split_pairs(manifest_path: str, split: str) -> List[LabeledPair]:
    part = read_manifest(manifest_path).select(split)
    if not len(part):
        raise ManifestError(f"{manifest_path}: no '{split}' entries")
    return part.load_pairs()


def _train_config(args, checkpoint: Path) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        lr=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
        max_steps=args.max_steps,
        checkpoint_path=str(checkpoint),
    )


# =========================================================
# Commands
# =========================================================

def cmd_gen(args) -> int:
    """합성 데이터셋 생성"""
    cfg = GeneratorConfig(model_mix=args.mix, image_size=args.size, seed=args.seed)
    out_dir = _out(args, "data/sim")
    pairs = gen_dataset(cfg, args.count, out_dir=out_dir, n_jobs=args.jobs, lossless=args.lossless)
    print(f"generated {len(pairs)} pairs")
    return EXIT_OK


def cmd_corpus(args) -> int:
    """절차적 도메인 코퍼스 또는 디렉토리 ingest"""
    out_dir = _out(args, f"data/{args.kind}")
    if args.from_dir:
        manifest = make_pool_from_dir(args.from_dir, out_dir, test_ratio=args.test_ratio, seed=args.seed)
    else:
        manifest = make_domain_corpus(
            args.kind, args.count, args.size, args.seed, out_dir, test_ratio=args.test_ratio
        )
    print(
        f"corpus ready: pool={len(manifest.select('pool'))}, "
        f"test={len(manifest.select('test'))} -> {default_manifest_path(out_dir)}"
    )
    return EXIT_OK


def cmd_pretrain(args) -> int:
    """D_SL로 ζ_SL 학습"""
    sim = read_manifest(args.data).select("train")
    if not len(sim):
        raise ManifestError(f"{args.data}: no 'train' entries")
    checkpoint = _out(args, "runs/pretrain") / PRETRAIN_CHECKPOINT
    params = train(
        sim.load_pairs(),
        _train_config(args, checkpoint),
        descriptor=NetworkDescriptor(width=args.width, depth=args.depth),
    )
    save_checkpoint(params, checkpoint)
    print(f"pretrained on {len(sim)} pairs -> {checkpoint}")
    return EXIT_OK


def cmd_score(args) -> int:
    """pool 점수 CSV 저장"""
    params = load_checkpoint(args.checkpoint)
    scores = score_pool(params, _pool(args.pool), n_jobs=args.jobs)
    out = _out(args, "runs/scores.csv")
    frame = pd.DataFrame([s.to_dict() for s in scores], columns=["id", "score"])
    atomic_write_text(out, frame.to_csv(index=False, float_format="%.10g"))
    print(f"scored {len(scores)} samples -> {out}")
    return EXIT_OK


def _read_scores(path: str) -> List[ScoredSample]:
    try:
        frame = pd.read_csv(path, dtype={"id": str})
    except OSError as e:
        raise ManifestError(f"Cannot read scores {path}: {e}") from e
    return [ScoredSample(sample_id=i, score=float(s)) for i, s in zip(frame["id"], frame["score"])]


def cmd_select(args) -> int:
    """top-K 또는 무작위 선택"""
    pool = _pool(args.pool)
    kind = StrategyKind(args.strategy)
    strategy = AcquisitionStrategy(kind, args.k, args.seed if kind is StrategyKind.RANDOM else None)
    scores = None
    if kind is StrategyKind.UNCERTAINTY_TOPK:
        if not args.scores:
            raise ConfigError("uncertainty_topk selection needs --scores")
        scores = _read_scores(args.scores)
    result = apply_strategy(strategy, pool, scores)
    out = write_selection(result, _out(args, "runs/selection.txt"))
    print(f"selected {result.k} samples -> {out}")
    return EXIT_OK


def cmd_finetune(args) -> int:
    """선택 subset 라벨링 후 미세조정"""
    params_sl = load_checkpoint(args.checkpoint)
    selection = read_selection(args.selection)
    pairs = label_selection(_pool(args.pool), selection.ids)
    checkpoint = _out(args, "runs/finetune") / "finetune.udc"
    params = finetune(params_sl, pairs, _train_config(args, checkpoint))
    save_checkpoint(params, checkpoint)
    print(f"fine-tuned on {len(pairs)} pairs -> {checkpoint}")
    return EXIT_OK


def cmd_eval(args) -> int:
    """split 평가"""
    params = load_checkpoint(args.checkpoint)
    report = evaluate_predictions(params, _split_pairs(args.data, args.split))
    if args.out:
        atomic_write_text(args.out, report.model_dump_json(indent=2) + "\n")
    print(
        f"mse={report.mse:.6f} mae={report.mae:.6f} psnr={report.psnr:.4f} "
        f"ssim={report.ssim:.4f} n={report.n_samples}"
    )
    return EXIT_OK


def render_panel(pair: LabeledPair, pred: PredictiveOutput) -> Tuple[np.ndarray, Dict[str, float]]:
    """
    [LR(업샘플) | HR | 예측 평균 | 분산 map | error map] 가로 패널

    Args:
        pair: 평가 쌍
        pred: 예측

    Returns:
        (패널 이미지, 분산/오차 map의 표시 배율)
    """
    channels = pair.hr.shape[2]
    mean = np.clip(pred.mean, 0.0, 1.0)
    errors = error_map(mean, pair.hr)
    scales = {"variance": float(pred.variance.max()), "error": float(errors.max())}

    def display(values: np.ndarray, scale: float) -> np.ndarray:
        shown = values / scale if scale > 0 else np.zeros_like(values)
        return np.repeat(np.clip(shown, 0.0, 1.0), channels, axis=2)

    panel = np.concatenate([
        upsample_nearest_4x(pair.lr),
        pair.hr,
        mean,
        display(pred.variance, scales["variance"]),
        display(errors, scales["error"]),
    ], axis=1)
    return panel, scales


def cmd_diagnose(args) -> int:
    """패널 이미지와 UncertaintyDiagnostics 리포트"""
    params = load_checkpoint(args.checkpoint)
    pairs = _split_pairs(args.data, args.split)
    out_dir = _out(args, "runs/diagnose")
    preds = predict_in_chunks(params, [p.lr for p in pairs])

    for pair, pred in zip(pairs, preds):
        panel, scales = render_panel(pair, pred)
        save_image(out_dir / "panels" / f"{pair.sample_id}.png", panel)
        atomic_write_text(
            out_dir / "panels" / f"{pair.sample_id}.scale.txt",
            "columns = lr, hr, mean, variance, error\n"
            f"variance_scale = {scales['variance']!r}\n"
            f"error_scale = {scales['error']!r}\n",
        )

    diag = uncertainty_diagnostics(params, pairs, bins=args.bins, predictions=preds)
    extra = {}
    if args.reference:
        reference = [
            pred.mean_uncertainty()
            for pred in predict_in_chunks(
                params, [p.lr for p in _split_pairs(args.reference, args.reference_split)]
            )
        ]
        shift = compare_uncertainty_distributions(
            reference,
            diag.mean_uncertainty,
            reference_name=f"{Path(args.reference).parent.name}:{args.reference_split}",
            current_name=f"{Path(args.data).parent.name}:{args.split}",
        )
        extra["shift"] = shift.to_dict()
    write_diagnostics(diag, out_dir / DIAGNOSTICS_NAME, extra=extra)
    print(
        f"diagnosed {len(pairs)} samples, spearman={diag.rank_correlation:.4f}, "
        f"modes={diag.modes} -> {out_dir / DIAGNOSTICS_NAME}"
    )
    return EXIT_OK


class Cell(NamedTuple):
    """실행 단위와 결과를 기록할 예산 목록 (SIM은 예산과 무관해 한 번만 실행)"""
    config: PipelineConfig
    budgets: List[int]


def plan_cells(cfg, out_dir: Path, done) -> List[Cell]:
    """완료되지 않은 (arm, budget, seed) cell 목록 (seed → arm → budget 순서)"""
    cells = []
    for seed in cfg.seeds:
        pretrained = out_dir / "pretrain" / f"seed_{seed}" / PRETRAIN_CHECKPOINT
        for arm in cfg.arms:
            todo = [b for b in cfg.budgets if (arm.value, b, seed) not in done]
            if not todo:
                continue
            if arm is Arm.SIM:
                cell_dir = out_dir / "cells" / arm.value / f"seed{seed}"
                cells.append(Cell(cfg.cell(arm, cfg.budgets[0], seed, cell_dir, pretrained), todo))
                continue
            for budget in todo:
                cell_dir = out_dir / "cells" / arm.value / f"k{budget}" / f"seed{seed}"
                cells.append(Cell(cfg.cell(arm, budget, seed, cell_dir, pretrained), [budget]))
    return cells


def cmd_experiment(args) -> int:
    """arm × budget × seed sweep, 결과 CSV와 요약표"""
    if not args.config:
        raise ConfigError("experiment needs --config")
    cfg = load_experiment_config(args.config)
    out_dir = Path(args.out or cfg.paths.out)
    pool, _ = load_domain(cfg.paths.domain)
    cfg.check_pool_size(len(pool))

    results_path = out_dir / RESULTS_NAME
    resolved_path = out_dir / RESOLVED_CONFIG_NAME
    resolved = format_flat_config(cfg.model_dump(mode="json"))
    if args.resume and resolved_path.exists() and resolved_path.read_text(encoding="utf-8") != resolved:
        raise ConfigError(
            f"{args.config} differs from the config recorded in {resolved_path}; rerun without --resume"
        )
    if results_path.exists() and not args.resume:
        results_path.unlink()
    atomic_write_text(resolved_path, resolved)
    done = completed_cells(results_path) if args.resume else set()
    cells = plan_cells(cfg, out_dir, done)
    logger.info(f"Experiment: {len(cells)} cells to run ({len(done)} rows already done)")

    # seed별 ζ_SL은 cell 실행 전에 순차적으로 준비 (캐시 키가 다르면 다시 학습)
    prepared = set()
    for cell in cells:
        path = cell.config.pretrained_checkpoint
        if cell.config.arm.pretrained and path not in prepared:
            ensure_pretrained(cell.config)
            prepared.add(path)

    tracker = ExperimentTracker(enabled=getattr(args, "mlflow", False))
    reports = Parallel(n_jobs=max(1, args.parallel), return_as="generator")(
        delayed(run_pipeline)(cell.config) for cell in cells
    )
    for cell, report in zip(cells, reports):
        for budget in cell.budgets:
            append_result(results_path, {**report.as_row(), "budget": budget})
        tracker.log_cell(report, artifact_dir=cell.config.out_dir)

    summary = write_summary(results_path, out_dir / SUMMARY_NAME, metrics=cfg.metrics)
    if set(ORDERED_ARMS) <= set(cfg.arms):
        check = check_ordering(read_results(results_path))
        write_ordering(check, out_dir / ORDERING_NAME)
        logger.info(f"Ordering: hard_ok={check.hard_ok}, margin_ok={check.margin_ok}")
    print(f"experiment finished: {len(cells)} cells run, {len(summary)} summary rows -> {out_dir}")
    return EXIT_OK


COMMANDS: Dict[str, Callable] = {
    "gen": cmd_gen,
    "corpus": cmd_corpus,
    "pretrain": cmd_pretrain,
    "score": cmd_score,
    "select": cmd_select,
    "finetune": cmd_finetune,
    "eval": cmd_eval,
    "diagnose": cmd_diagnose,
    "experiment": cmd_experiment,
}


def dispatch(args) -> int:
    """명령 실행 후 예외를 종료 코드로 변환"""
    try:
        return COMMANDS[args.command](args)
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_UNEXPECTED:
            logger.exception(f"Command '{args.command}' failed: {e}")
        else:
            logger.error(f"Command '{args.command}' failed (exit {code}): {e}")
        return code
