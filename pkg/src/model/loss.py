"""
Heteroscedastic Gaussian NLL

per-pixel 0.5·r²/σ̂² + 0.5·log σ̂² (r²는 채널 평균), 픽셀과 배치에 대해 평균
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from src.data.transforms import LabeledPair
from src.errors import NumericalError, ShapeError
from src.model.network import (
    VARIANCE_FLOOR,
    NetworkParams,
    PredictiveOutput,
    predict_in_chunks,
)
from src.numerics import (
    ComputationTape,
    OptimizerState,
    Tensor,
    adam_step,
    add,
    backward,
    channel_mean,
    div,
    log,
    mean_all,
    mul,
    softplus,
    sub,
)

logger = logging.getLogger(__name__)


def nll_tensor(mean: Tensor, variance: Tensor, target: Tensor) -> Tensor:
    """
    tape 기록 가능한 NLL

    Args:
        mean: (N, C, H, W) 예측 평균
        variance: (N, 1, H, W) 예측 분산
        target: (N, C, H, W) HR

    Returns:
        스칼라 손실 텐서
    """
    if mean.dims != target.dims:
        raise ShapeError(f"Prediction {mean.dims} and target {target.dims} differ")
    n, _, h, w = mean.dims
    if variance.dims != (n, 1, h, w):
        raise ShapeError(f"Variance dims {variance.dims} do not match (N, 1, H, W)={(n, 1, h, w)}")
    if np.any(variance.values <= 0):
        raise NumericalError("Predictive variance must be strictly positive")

    residual = sub(mean, target)
    squared = channel_mean(mul(residual, residual))
    per_pixel = add(mul(div(squared, variance), 0.5), mul(log(variance), 0.5))
    return mean_all(per_pixel)


def _as_nchw(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[:, :, None]
    return image.transpose(2, 0, 1)[None]


def nll_loss(pred: PredictiveOutput, y: np.ndarray) -> float:
    """
    단일 예측의 NLL

    Args:
        pred: PredictiveOutput (mean (H, W, C), variance (H, W, 1))
        y: HR (H, W, C)

    Returns:
        손실 값
    """
    loss = nll_tensor(
        Tensor(_as_nchw(pred.mean)),
        Tensor(_as_nchw(pred.variance)),
        Tensor(_as_nchw(y)),
    )
    return loss.item()


def optimal_sigma(residual: np.ndarray) -> np.ndarray:
    """고정 ŷ에서 NLL을 최소화하는 σ̂² = r² (elementwise)"""
    residual = np.asarray(residual, dtype=np.float64)
    if not np.all(np.isfinite(residual)):
        raise ValueError("Residual must be finite")
    return residual * residual


def fit_variance_map(
    pred_mean: np.ndarray,
    y: np.ndarray,
    steps: int = 500,
    lr: float = 0.05,
    variance_floor: float = VARIANCE_FLOOR
) -> Tuple[np.ndarray, List[float]]:
    """
    평균을 고정하고 픽셀별 분산 logit만 Adam으로 최적화 (stationarity 실험)

    Args:
        pred_mean: (H, W, C) 고정 예측 평균
        y: (H, W, C) 목표
        steps: optimizer step 수
        lr: 학습률
        variance_floor: ε_v

    Returns:
        (학습된 분산 (H, W, 1), step별 손실)
    """
    mean = Tensor(_as_nchw(pred_mean))
    target = Tensor(_as_nchw(y))
    if mean.dims != target.dims:
        raise ShapeError(f"Prediction {mean.dims} and target {target.dims} differ")

    _, _, h, w = mean.dims
    start = float(np.log(np.expm1(0.05)))
    logits = {"variance_logits": np.full((1, 1, h, w), start)}
    state = OptimizerState(lr=lr)
    losses = []

    for _ in range(steps):
        with ComputationTape() as tape:
            raw = Tensor(logits["variance_logits"], requires_grad=True, name="variance_logits")
            variance = add(softplus(raw), variance_floor)
            loss = nll_tensor(mean, variance, target)
        grads = backward(tape, loss, {"variance_logits": raw})
        logits, state = adam_step(logits, grads, state)
        losses.append(loss.item())

    variance = np.logaddexp(0.0, logits["variance_logits"]) + variance_floor
    logger.info(f"Variance map fitted: steps={steps}, final loss={losses[-1] if losses else float('nan'):.6f}")
    return variance[0].transpose(1, 2, 0), losses


def evaluate_nll(
    params: NetworkParams,
    pairs: Sequence[LabeledPair],
    batch_size: int = 16
) -> float:
    """라벨 집합 위의 평균 NLL (검증용)"""
    if not pairs:
        raise ValueError("Evaluation set is empty")
    preds = predict_in_chunks(params, [p.lr for p in pairs], batch_size=batch_size)
    losses = [nll_loss(pred, pair.hr) for pred, pair in zip(preds, pairs)]
    return float(np.mean(losses))

