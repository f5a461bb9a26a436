"""
Differentiable Primitives

SR 네트워크 학습에 필요한 최소 연산 집합 (conv2d, elementwise, pixel_shuffle, reduction)
"""

import logging
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from src.errors import NumericalError, ShapeError
from src.numerics.tensor import Tensor, active_tape

logger = logging.getLogger(__name__)

Operand = Union[Tensor, float, int]


def _emit(
    op: str,
    inputs: Tuple[Tensor, ...],
    values: np.ndarray,
    vjp: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
) -> Tensor:
    """결과 텐서를 만들고, 기록 중이면 tape에 추가"""
    tape = active_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(values, requires_grad=track)
    if track:
        tape.record(op, inputs, out, vjp)
    return out


def _as_tensor(x: Operand) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


def _unbroadcast(grad: np.ndarray, dims: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == dims:
        return grad
    total = grad.sum(dtype=np.float64)
    return np.full(dims, total, dtype=grad.dtype)


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    if a.dims != b.dims and a.size != 1 and b.size != 1:
        raise ShapeError(f"{op}: incompatible dims {a.dims} and {b.dims}")


# ============================================================
# Elementwise
# ============================================================

def add(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast("add", a, b)
    return _emit(
        "add", (a, b), a.values + b.values,
        lambda g: (_unbroadcast(g, a.dims), _unbroadcast(g, b.dims))
    )


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast("sub", a, b)
    return _emit(
        "sub", (a, b), a.values - b.values,
        lambda g: (_unbroadcast(g, a.dims), _unbroadcast(-g, b.dims))
    )


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast("mul", a, b)
    return _emit(
        "mul", (a, b), a.values * b.values,
        lambda g: (
            _unbroadcast(g * b.values, a.dims),
            _unbroadcast(g * a.values, b.dims)
        )
    )


def div(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast("div", a, b)
    if np.any(b.values == 0):
        raise NumericalError("div: division by zero")
    return _emit(
        "div", (a, b), a.values / b.values,
        lambda g: (
            _unbroadcast(g / b.values, a.dims),
            _unbroadcast(-g * a.values / (b.values * b.values), b.dims)
        )
    )


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.values)
    return _emit("exp", (x,), out, lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    if np.any(x.values <= 0):
        raise NumericalError(
            f"log of nonpositive value (min={float(x.values.min())})"
        )
    return _emit("log", (x,), np.log(x.values), lambda g: (g / x.values,))


def softplus(x: Tensor) -> Tensor:
    """log(1 + e^x), 큰 x에서도 overflow 없이 계산"""
    out = np.logaddexp(0.0, x.values)
    return _emit("softplus", (x,), out, lambda g: (g * expit(x.values),))


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    positive = x.values > 0
    out = np.where(positive, x.values, slope * x.values)
    return _emit(
        "leaky_relu", (x,), out,
        lambda g: (np.where(positive, g, slope * g),)
    )


_ELEMENTWISE: Dict[str, Callable[..., Tensor]] = {
    "add": add,
    "mul": mul,
    "sub": sub,
    "div": div,
    "exp": exp,
    "log": log,
    "softplus": softplus,
    "leaky_relu": leaky_relu,
}


def elementwise(op: str, *args, **kwargs) -> Tensor:
    """
    이름으로 elementwise 연산 호출

    Args:
        op: add, mul, sub, div, exp, log, softplus, leaky_relu
        *args: 피연산자 (스칼라-텐서 broadcast만 허용)

    Returns:
        결과 텐서
    """
    if op not in _ELEMENTWISE:
        raise ValueError(
            f"Unsupported elementwise op: {op}. Supported: {list(_ELEMENTWISE.keys())}"
        )
    return _ELEMENTWISE[op](*args, **kwargs)


# ============================================================
# Reductions
# ============================================================

def sum_all(x: Tensor) -> Tensor:
    total = np.asarray(x.values.sum(dtype=np.float64))
    return _emit(
        "sum", (x,), total,
        lambda g: (np.full(x.dims, g.reshape(-1)[0], dtype=x.values.dtype),)
    )


def mean_all(x: Tensor) -> Tensor:
    n = x.size
    avg = np.asarray(x.values.sum(dtype=np.float64) / n)
    return _emit(
        "mean", (x,), avg,
        lambda g: (np.full(x.dims, g.reshape(-1)[0] / n, dtype=x.values.dtype),)
    )


def channel_mean(x: Tensor) -> Tensor:
    """NCHW → N1HW 채널 평균"""
    if len(x.dims) != 4:
        raise ShapeError(f"channel_mean expects NCHW, got {x.dims}")
    c = x.dims[1]
    out = x.values.mean(axis=1, keepdims=True, dtype=np.float64)
    return _emit(
        "channel_mean", (x,), out,
        lambda g: (np.repeat(g / c, c, axis=1).astype(x.values.dtype),)
    )


# ============================================================
# Convolution / Upsampling
# ============================================================

def conv2d(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """
    stride 1, same zero-padding cross-correlation

    Args:
        x: 입력 (N, C, H, W)
        kernel: 가중치 (O, C, K, K), K 홀수
        bias: 편향 (O,)

    Returns:
        출력 (N, O, H, W)
    """
    if len(x.dims) != 4 or len(kernel.dims) != 4:
        raise ShapeError(f"conv2d expects NCHW input and OIKK kernel, got {x.dims}, {kernel.dims}")
    n, c, h, w = x.dims
    o, i, k, k2 = kernel.dims
    if k != k2 or k % 2 == 0:
        raise ShapeError(f"Kernel must be square with odd size, got {k}x{k2}")
    if i != c:
        raise ShapeError(f"Channel mismatch: input has {c}, kernel expects {i}")
    if bias.dims != (o,):
        raise ShapeError(f"Bias dims {bias.dims} do not match {o} output channels")

    pad = k // 2
    padded = np.pad(x.values, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))
    out = np.tensordot(windows, kernel.values, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + bias.values[None, :, None, None]

    def vjp(g):
        grad_kernel = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_bias = g.sum(axis=(0, 2, 3))
        g_padded = np.pad(g, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        g_windows = sliding_window_view(g_padded, (k, k), axis=(2, 3))
        flipped = kernel.values[:, :, ::-1, ::-1]
        grad_x = np.tensordot(g_windows, flipped, axes=([1, 4, 5], [0, 2, 3]))
        return (
            np.ascontiguousarray(grad_x.transpose(0, 3, 1, 2)),
            grad_kernel,
            grad_bias,
        )

    return _emit("conv2d", (x, kernel, bias), out, vjp)


def pixel_shuffle(x: Tensor, r: int) -> Tensor:
    """
    depth-to-space: (N, C·r², H, W) → (N, C, rH, rW)

    Args:
        x: 입력 텐서
        r: 업스케일 배율
    """
    if len(x.dims) != 4:
        raise ShapeError(f"pixel_shuffle expects NCHW, got {x.dims}")
    if r < 1:
        raise ValueError(f"Upscale factor must be >= 1, got {r}")
    n, cr2, h, w = x.dims
    if cr2 % (r * r) != 0:
        raise ShapeError(f"Channel count {cr2} is not divisible by r^2={r * r}")
    c = cr2 // (r * r)

    out = (
        x.values.reshape(n, c, r, r, h, w)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, c, h * r, w * r)
    )

    def vjp(g):
        grad = (
            g.reshape(n, c, h, r, w, r)
            .transpose(0, 1, 3, 5, 2, 4)
            .reshape(n, cr2, h, w)
        )
        return (grad,)

    return _emit("pixel_shuffle", (x,), out, vjp)
