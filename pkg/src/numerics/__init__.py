"""Dense tensor core: reverse-mode gradients and Adam"""

from .tensor import (
    ComputationTape,
    Tensor,
    active_tape,
    backward,
    default_dtype,
    get_default_dtype,
)
from .ops import (
    add,
    channel_mean,
    conv2d,
    div,
    elementwise,
    exp,
    leaky_relu,
    log,
    mean_all,
    mul,
    pixel_shuffle,
    softplus,
    sub,
    sum_all,
)
from .optim import OptimizerState, adam_step

__all__ = [
    "ComputationTape",
    "Tensor",
    "active_tape",
    "backward",
    "default_dtype",
    "get_default_dtype",
    "add",
    "channel_mean",
    "conv2d",
    "div",
    "elementwise",
    "exp",
    "leaky_relu",
    "log",
    "mean_all",
    "mul",
    "pixel_shuffle",
    "softplus",
    "sub",
    "sum_all",
    "OptimizerState",
    "adam_step",
]
