"""
Model Training Module

heteroscedastic NLL을 Adam으로 최소화하는 사전학습(ζ_SL) 및 미세조정(ζ_KL)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.data.transforms import LabeledPair
from src.errors import ConfigError, NumericalError, TrainingDivergedError
from src.model.checkpoint import save_checkpoint
from src.model.loss import nll_tensor
from src.model.network import (
    VARIANCE_FLOOR,
    NetworkDescriptor,
    NetworkParams,
    forward_tensors,
    init_params,
    to_nchw,
)
from src.numerics import ComputationTape, OptimizerState, Tensor, adam_step, backward

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    """학습 설정"""
    epochs: int = Field(default=10, ge=0)
    batch_size: int = Field(default=16, ge=1)
    lr: float = Field(default=1e-3, gt=0)
    seed: int = Field(default=0, ge=0)
    variance_floor: float = Field(default=VARIANCE_FLOOR, gt=0)
    checkpoint_path: Optional[str] = None
    trainable_prefixes: Optional[List[str]] = None
    max_steps: Optional[int] = Field(default=None, ge=1)

    def is_trainable(self, name: str) -> bool:
        if not self.trainable_prefixes:
            return True
        return any(name.startswith(prefix) for prefix in self.trainable_prefixes)


@dataclass
class TrainingHistory:
    """step별/epoch별 손실 기록"""
    step_losses: List[float] = field(default_factory=list)
    epoch_losses: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "steps": len(self.step_losses),
            "epoch_losses": [round(v, 6) for v in self.epoch_losses],
            "first_loss": round(self.step_losses[0], 6) if self.step_losses else None,
            "last_loss": round(self.step_losses[-1], 6) if self.step_losses else None,
        }


class Trainer:
    """seed 고정 셔플 minibatch 학습기"""

    def __init__(self, cfg: TrainConfig, params: NetworkParams):
        """
        학습기 초기화

        Args:
            cfg: 학습 설정
            params: 시작 파라미터 (사전학습이면 init_params, 미세조정이면 ζ_SL)
        """
        self.cfg = cfg
        self.params = params
        self.history = TrainingHistory()
        self.trainable = [name for name in params.names if cfg.is_trainable(name)]
        if not self.trainable:
            raise ConfigError(
                f"No parameter matches trainable prefixes {cfg.trainable_prefixes}"
            )

    @staticmethod
    def stack(pairs: Sequence[LabeledPair]) -> Tuple[np.ndarray, np.ndarray]:
        """LabeledPair 목록 → (LR NCHW, HR NCHW)"""
        return to_nchw([p.lr for p in pairs]), to_nchw([p.hr for p in pairs])

    def loss_and_grads(
        self,
        params: NetworkParams,
        lr_batch: np.ndarray,
        hr_batch: np.ndarray
    ) -> Tuple[float, Dict[str, np.ndarray]]:
        """배치 하나의 손실과 학습 대상 파라미터 gradient"""
        with ComputationTape() as tape:
            tensors = {
                name: Tensor(t.values, requires_grad=name in self.trainable, name=name)
                for name, t in params.tensors.items()
            }
            mean, variance = forward_tensors(
                tensors, Tensor(lr_batch), params.descriptor, self.cfg.variance_floor
            )
            loss = nll_tensor(mean, variance, Tensor(hr_batch))
        grads = backward(tape, loss, {name: tensors[name] for name in self.trainable})
        return loss.item(), grads

    def fit(self, pairs: Sequence[LabeledPair]) -> NetworkParams:
        """
        모델 학습

        Args:
            pairs: 학습 쌍 (모두 같은 크기)

        Returns:
            학습된 파라미터
        """
        if not pairs:
            raise ValueError("Training set is empty")
        lr_all, hr_all = self.stack(pairs)
        n = len(pairs)
        rng = np.random.default_rng(self.cfg.seed)
        state = OptimizerState(lr=self.cfg.lr)
        values = self.params.arrays()
        step = 0

        logger.info(
            f"Training started: pairs={n}, epochs={self.cfg.epochs}, "
            f"batch={self.cfg.batch_size}, lr={self.cfg.lr}, trainable={len(self.trainable)}"
        )
        for epoch in range(self.cfg.epochs):
            order = rng.permutation(n)
            epoch_losses = []
            for start in range(0, n, self.cfg.batch_size):
                if self.cfg.max_steps is not None and step >= self.cfg.max_steps:
                    break
                batch = order[start:start + self.cfg.batch_size]
                current = self.params.replace(values) if step else self.params
                try:
                    loss, grads = self.loss_and_grads(current, lr_all[batch], hr_all[batch])
                except NumericalError as e:
                    raise TrainingDivergedError(
                        f"Training diverged at epoch {epoch}, step {step}: {e}"
                    ) from e
                if not np.isfinite(loss):
                    raise TrainingDivergedError(
                        f"Non-finite loss at epoch {epoch}, step {step}: {loss}"
                    )
                values, state = adam_step(values, grads, state)
                self.history.step_losses.append(loss)
                epoch_losses.append(loss)
                step += 1

            if not epoch_losses:
                break
            self.history.epoch_losses.append(float(np.mean(epoch_losses)))
            logger.info(f"Epoch {epoch + 1}/{self.cfg.epochs}: loss={self.history.epoch_losses[-1]:.6f}")
            if self.cfg.checkpoint_path:
                try:
                    snapshot = self.params.replace(values)
                except NumericalError as e:
                    raise TrainingDivergedError(f"Parameters became non-finite: {e}") from e
                save_checkpoint(snapshot, self.cfg.checkpoint_path)

        try:
            self.params = self.params.replace(values)
        except NumericalError as e:
            raise TrainingDivergedError(f"Parameters became non-finite: {e}") from e
        logger.info(f"Training completed. steps={step}, loss={self.history.step_losses[-1]:.6f}")
        return self.params


def train(
    pairs: Sequence[LabeledPair],
    cfg: TrainConfig,
    init: Optional[NetworkParams] = None,
    descriptor: Optional[NetworkDescriptor] = None
) -> NetworkParams:
    """
    사전학습 편의 함수

    Args:
        pairs: 학습 데이터 (D_SL 또는 Random arm의 K개 쌍)
        cfg: 학습 설정 (epochs >= 1)
        init: 시작 파라미터 (없으면 cfg.seed로 초기화)
        descriptor: init이 없을 때 사용할 아키텍처

    Returns:
        학습된 파라미터
    """
    if cfg.epochs < 1:
        raise ConfigError(f"Training needs epochs >= 1, got {cfg.epochs}")
    params = init if init is not None else init_params(descriptor, seed=cfg.seed)
    return Trainer(cfg, params).fit(pairs)


def finetune(
    params_sl: NetworkParams,
    pairs: Sequence[LabeledPair],
    cfg: TrainConfig
) -> NetworkParams:
    """
    ζ_SL에서 시작하는 미세조정 (epochs=0이면 ζ_SL 그대로)

    Args:
        params_sl: 사전학습 파라미터 (변경되지 않음)
        pairs: 라벨링된 선택 subset D_UL^K
        cfg: 미세조정 설정

    Returns:
        ζ_KL
    """
    if not pairs:
        raise ValueError("Fine-tuning subset is empty")
    if cfg.epochs == 0:
        logger.info("Fine-tuning skipped (epochs=0)")
        return params_sl
    return Trainer(cfg, params_sl).fit(pairs)
