"""
Tensor & Computation Tape

불변 dense 텐서와 reverse-mode 미분을 위한 연산 기록(tape)
"""

import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.errors import NumericalError, ShapeError

logger = logging.getLogger(__name__)

_dtype_stack: List[np.dtype] = [np.dtype(np.float32)]
_local = threading.local()


def get_default_dtype() -> np.dtype:
    """현재 텐서 저장 dtype"""
    return _dtype_stack[-1]


@contextmanager
def default_dtype(dtype) -> Iterator[np.dtype]:
    """
    텐서 저장 dtype 임시 변경 (gradient check는 float64로 수행)

    Args:
        dtype: np.float32 또는 np.float64
    """
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"Unsupported tensor dtype: {dtype}")
    _dtype_stack.append(dtype)
    try:
        yield dtype
    finally:
        _dtype_stack.pop()


class Tensor:
    """row-major dense 텐서 (생성 후 값 변경 불가)"""

    __slots__ = ("_values", "requires_grad", "name")

    def __init__(
        self,
        values,
        requires_grad: bool = False,
        name: Optional[str] = None
    ):
        arr = np.array(values, dtype=get_default_dtype())
        if not np.all(np.isfinite(arr)):
            raise NumericalError(
                f"Tensor values must be finite (name={name}, dims={arr.shape})"
            )
        arr.setflags(write=False)
        self._values = arr
        self.requires_grad = requires_grad
        self.name = name

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dims(self) -> Tuple[int, ...]:
        return self._values.shape

    @property
    def size(self) -> int:
        return int(self._values.size)

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single value, got dims {self.dims}")
        return float(self._values.reshape(-1)[0])

    def __repr__(self) -> str:
        label = f"{self.name}, " if self.name else ""
        return f"Tensor({label}dims={self.dims}, requires_grad={self.requires_grad})"


@dataclass
class TapeEntry:
    """기록된 primitive 연산 하나"""
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    vjp: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class ComputationTape:
    """연산 기록 순서가 곧 위상 순서인 tape"""

    def __init__(self):
        self.entries: List[TapeEntry] = []

    def record(
        self,
        op: str,
        inputs: Tuple[Tensor, ...],
        output: Tensor,
        vjp: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
    ) -> None:
        self.entries.append(TapeEntry(op=op, inputs=inputs, output=output, vjp=vjp))

    def __len__(self) -> int:
        return len(self.entries)

    def __enter__(self) -> "ComputationTape":
        stack = getattr(_local, "tapes", None)
        if stack is None:
            stack = _local.tapes = []
        stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _local.tapes.pop()


def active_tape() -> Optional[ComputationTape]:
    """현재 스레드에서 기록 중인 tape (없으면 None)"""
    stack = getattr(_local, "tapes", None)
    return stack[-1] if stack else None


def backward(
    tape: ComputationTape,
    loss: Tensor,
    params: Mapping[str, Tensor]
) -> Dict[str, np.ndarray]:
    """
    reverse accumulation으로 파라미터별 gradient 계산

    Args:
        tape: forward 동안 기록된 tape
        loss: 스칼라 손실 텐서
        params: 이름 → 파라미터 텐서

    Returns:
        이름 → gradient (파라미터와 같은 shape)
    """
    if loss.size != 1:
        raise ShapeError(f"Loss must be scalar, got dims {loss.dims}")

    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}

    for entry in reversed(tape.entries):
        upstream = grads.pop(id(entry.output), None)
        if upstream is None:
            continue
        for tensor, grad in zip(entry.inputs, entry.vjp(upstream)):
            if grad is None or not tensor.requires_grad:
                continue
            if grad.shape != tensor.dims:
                raise ShapeError(
                    f"Gradient shape {grad.shape} does not match {tensor.dims} in op {entry.op}"
                )
            key = id(tensor)
            grads[key] = grads[key] + grad if key in grads else grad

    return {
        name: np.asarray(
            grads.get(id(tensor), np.zeros(tensor.dims)), dtype=tensor.values.dtype
        )
        for name, tensor in params.items()
    }
