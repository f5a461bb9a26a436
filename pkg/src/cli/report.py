"""
Sweep Reporting

실험 결과 CSV(append-only)와 (arm, budget)별 seed 평균 요약표, pboost 열
arm 간 PSNR 순서 점검 (SIM+Random > SIM, USIM-DAL margin)
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from src.active.pipeline import Arm
from src.data.image_io import atomic_write_text
from src.errors import PBoostUndefinedError
from src.metrics.quality import pboost

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["dataset", "arm", "budget", "seed", "mse", "mae", "psnr", "ssim"]
METRIC_COLUMNS = ["mse", "mae", "psnr", "ssim"]
FLOAT_FORMAT = "%.10g"

PathLike = Union[str, Path]


def append_result(path: PathLike, row: Dict) -> None:
    """결과 한 줄 추가 (파일이 없으면 헤더 포함)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row], columns=RESULT_COLUMNS)
    frame.to_csv(path, mode="a", header=not path.exists(), index=False, float_format=FLOAT_FORMAT)


def read_results(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        return pd.DataFrame(columns=RESULT_COLUMNS)
    frame = pd.read_csv(path, dtype={"dataset": str, "arm": str})
    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: missing result columns {missing}")
    return frame[RESULT_COLUMNS]


def completed_cells(path: PathLike) -> Set[Tuple[str, int, int]]:
    """이미 기록된 (arm, budget, seed)"""
    frame = read_results(path)
    return {
        (str(arm), int(budget), int(seed))
        for arm, budget, seed in zip(frame["arm"], frame["budget"], frame["seed"])
    }


def _pboost_for(means: pd.DataFrame, dataset: str, budget: int) -> float:
    psnr = {
        row.arm: row.psnr_mean
        for row in means[(means["dataset"] == dataset) & (means["budget"] == budget)].itertuples()
    }
    needed = (Arm.USIM_DAL.value, Arm.SIM_RANDOM.value, Arm.SIM.value)
    if not all(arm in psnr for arm in needed):
        return np.nan
    try:
        return pboost(*(psnr[arm] for arm in needed))
    except PBoostUndefinedError as e:
        logger.warning(f"pboost undefined for dataset={dataset}, budget={budget}: {e}")
        return np.nan


def summary_columns(metrics: Sequence[str] = METRIC_COLUMNS) -> List[str]:
    """요약표 열: 키, 선택한 지표의 mean/std, pboost"""
    unknown = [m for m in metrics if m not in METRIC_COLUMNS]
    if unknown:
        raise ValueError(f"Unknown metrics {unknown}; choose from {METRIC_COLUMNS}")
    return (
        ["dataset", "arm", "budget", "n_seeds"]
        + [f"{m}_{stat}" for m in metrics for stat in ("mean", "std")]
        + ["pboost"]
    )


def summarize(results: pd.DataFrame, metrics: Sequence[str] = METRIC_COLUMNS) -> pd.DataFrame:
    """
    (dataset, arm, budget)별 seed 평균/표준편차와 USIM-DAL 행의 pboost

    Args:
        results: RESULT_COLUMNS 형식의 결과
        metrics: 요약표에 넣을 지표 (pboost는 항상 PSNR 기준)

    Returns:
        summary_columns(metrics) 형식의 요약표
    """
    columns = summary_columns(metrics)
    if results.empty:
        return pd.DataFrame(columns=columns)
    grouped = results.groupby(["dataset", "arm", "budget"], sort=True)
    summary = grouped[METRIC_COLUMNS].agg(["mean", "std"])
    summary.columns = [f"{metric}_{stat}" for metric, stat in summary.columns]
    summary = summary.fillna(0.0)
    summary["n_seeds"] = grouped["seed"].nunique()
    summary = summary.reset_index()

    summary["pboost"] = [
        _pboost_for(summary, row.dataset, row.budget) if row.arm == Arm.USIM_DAL.value else np.nan
        for row in summary.itertuples()
    ]
    return summary[columns]


def write_summary(
    results_path: PathLike,
    summary_path: PathLike,
    metrics: Sequence[str] = METRIC_COLUMNS
) -> pd.DataFrame:
    """결과 CSV를 읽어 요약표 저장"""
    summary = summarize(read_results(results_path), metrics=metrics)
    summary.to_csv(summary_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Summary written: {summary_path} ({len(summary)} rows)")
    return summary


@dataclass
class BudgetOrdering:
    """한 예산에서 arm 간 PSNR 순서 점검"""
    budget: int
    n_seeds: int
    finetune_wins: int
    usim_within_margin: int
    sim_beats_random: Optional[bool]
    usim_highest: bool

    def to_dict(self) -> Dict:
        return {
            "budget": self.budget,
            "n_seeds": self.n_seeds,
            "finetune_wins": self.finetune_wins,
            "usim_within_margin": self.usim_within_margin,
            "sim_beats_random": self.sim_beats_random,
            "usim_highest": self.usim_highest,
        }


@dataclass
class OrderingCheck:
    """
    arm 순서 점검 결과

    hard: SIM+Random > SIM (seed quorum), SIM > Random (평균)
    margin: USIM-DAL ≥ SIM+Random − margin (seed quorum), USIM-DAL 최고 평균 (예산 quorum)
    margin 실패는 finding으로 기록만 함
    """
    dataset: str
    margin_db: float
    budgets: List[BudgetOrdering] = field(default_factory=list)
    hard_ok: bool = True
    margin_ok: bool = True
    findings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "dataset": self.dataset,
            "margin_db": self.margin_db,
            "hard_ok": self.hard_ok,
            "margin_ok": self.margin_ok,
            "findings": list(self.findings),
            "budgets": [b.to_dict() for b in self.budgets],
        }


def _psnr_by_seed(frame: pd.DataFrame, arm: Arm, budget: int) -> pd.Series:
    rows = frame[(frame["arm"] == arm.value) & (frame["budget"] == budget)]
    return rows.set_index("seed")["psnr"].sort_index()


def check_ordering(
    results: pd.DataFrame,
    dataset: Optional[str] = None,
    margin_db: float = 0.05,
    seed_quorum: float = 0.8,
    budget_quorum: float = 2 / 3
) -> OrderingCheck:
    """
    SIM, SIM+Random, USIM-DAL (있으면 Random)의 PSNR 순서 점검

    Args:
        results: RESULT_COLUMNS 형식의 결과
        dataset: 점검할 dataset (None이면 결과에 하나뿐이어야 함)
        margin_db: USIM-DAL이 SIM+Random보다 낮아도 되는 폭 (dB)
        seed_quorum: seed별 비교가 성립해야 하는 seed 비율
        budget_quorum: USIM-DAL 최고 평균이 성립해야 하는 예산 비율

    Returns:
        OrderingCheck
    """
    if dataset is None:
        datasets = sorted(set(results["dataset"]))
        if len(datasets) != 1:
            raise ValueError(f"Pick one dataset to check, results have {datasets}")
        dataset = datasets[0]
    frame = results[results["dataset"] == dataset]
    needed = (Arm.SIM, Arm.SIM_RANDOM, Arm.USIM_DAL)
    missing = [a.value for a in needed if a.value not in set(frame["arm"])]
    if missing:
        raise ValueError(f"Ordering check needs arms {missing} for dataset '{dataset}'")

    check = OrderingCheck(dataset=dataset, margin_db=margin_db)
    budgets = sorted(set(frame.loc[frame["arm"] == Arm.USIM_DAL.value, "budget"]))
    for budget in budgets:
        sim = _psnr_by_seed(frame, Arm.SIM, budget)
        sim_random = _psnr_by_seed(frame, Arm.SIM_RANDOM, budget)
        usim = _psnr_by_seed(frame, Arm.USIM_DAL, budget)
        seeds = sim.index.intersection(sim_random.index).intersection(usim.index)
        if not len(seeds):
            raise ValueError(f"No seed has all three arms at budget {budget}")
        sim, sim_random, usim = sim.loc[seeds], sim_random.loc[seeds], usim.loc[seeds]

        random = _psnr_by_seed(frame, Arm.RANDOM, budget)
        means = {Arm.SIM: sim.mean(), Arm.SIM_RANDOM: sim_random.mean()}
        sim_beats_random = None
        if len(random):
            means[Arm.RANDOM] = random.mean()
            sim_beats_random = bool(sim.mean() > random.mean())
        row = BudgetOrdering(
            budget=int(budget),
            n_seeds=len(seeds),
            finetune_wins=int((sim_random > sim).sum()),
            usim_within_margin=int((usim >= sim_random - margin_db).sum()),
            sim_beats_random=sim_beats_random,
            usim_highest=bool(all(usim.mean() > m for m in means.values())),
        )
        check.budgets.append(row)

        quorum = int(np.ceil(seed_quorum * row.n_seeds - 1e-9))
        if row.finetune_wins < quorum:
            check.hard_ok = False
            check.findings.append(
                f"budget {budget}: SIM+Random beat SIM in {row.finetune_wins}/{row.n_seeds} seeds"
            )
        if sim_beats_random is False:
            check.hard_ok = False
            check.findings.append(f"budget {budget}: SIM mean PSNR is not above Random")
        if row.usim_within_margin < quorum:
            check.margin_ok = False
            check.findings.append(
                f"budget {budget}: USIM-DAL within {margin_db} dB of SIM+Random in "
                f"{row.usim_within_margin}/{row.n_seeds} seeds"
            )

    highest = sum(b.usim_highest for b in check.budgets)
    if highest < int(np.ceil(budget_quorum * len(check.budgets) - 1e-9)):
        check.margin_ok = False
        check.findings.append(
            f"USIM-DAL has the highest mean PSNR in {highest}/{len(check.budgets)} budgets"
        )
    for finding in check.findings:
        logger.warning(f"Ordering ({dataset}): {finding}")
    return check


def write_ordering(check: OrderingCheck, path: PathLike) -> Path:
    """OrderingCheck를 YAML로 저장"""
    text = yaml.safe_dump(check.to_dict(), sort_keys=False, allow_unicode=True)
    return atomic_write_text(path, text)
