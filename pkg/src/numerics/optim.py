"""
Adaptive-Moment Optimizer

bias-corrected Adam 업데이트 (파라미터 이름 단위)
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Tuple

import numpy as np

from src.errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """Adam 상태 (moment 누적값, step 카운터, 하이퍼파라미터)"""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"Learning rate must be positive, got {self.lr}")
        if self.step < 0:
            raise ValueError(f"Step counter must be >= 0, got {self.step}")


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: OptimizerState
) -> Tuple[Dict[str, np.ndarray], OptimizerState]:
    """
    Adam 한 스텝

    Args:
        params: 이름 → 파라미터 값
        grads: 이름 → gradient (여기 없는 파라미터는 고정)
        state: 이전 optimizer 상태

    Returns:
        (갱신된 파라미터, 갱신된 상태)
    """
    step = state.step + 1
    first = dict(state.first_moment)
    second = dict(state.second_moment)
    updated = dict(params)

    bias1 = 1.0 - state.beta1 ** step
    bias2 = 1.0 - state.beta2 ** step

    for name, grad in grads.items():
        if name not in params:
            raise ShapeError(f"Gradient for unknown parameter: {name}")
        value = np.asarray(params[name])
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != value.shape:
            raise ShapeError(
                f"Shape mismatch for {name}: param {value.shape}, grad {grad.shape}"
            )

        m = first.get(name, np.zeros(value.shape))
        v = second.get(name, np.zeros(value.shape))
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        first[name] = m
        second[name] = v

        delta = state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        updated[name] = (value - delta).astype(value.dtype)

    return updated, replace(
        state, step=step, first_moment=first, second_moment=second
    )
