"""
Probabilistic Super-Resolution Network

Ψ(x; ζ) → {ŷ, σ̂²}: LR 해상도의 conv trunk와 두 개의 pixel-shuffle head
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.data.transforms import SCALE, as_image, upsample_nearest_4x
from src.errors import ShapeError
from src.numerics import (
    Tensor,
    add,
    conv2d,
    leaky_relu,
    pixel_shuffle,
    softplus,
)

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-6
INITIAL_VARIANCE = 0.01
LEAKY_SLOPE = 0.2
MIN_INPUT_SIDE = 8


@dataclass(frozen=True)
class NetworkDescriptor:
    """아키텍처 기술자 (채널 폭, trunk 깊이, 업스케일 배율)"""
    in_channels: int = 3
    width: int = 32
    depth: int = 4
    kernel: int = 3
    scale: int = SCALE
    variance_channels: int = 1

    def __post_init__(self):
        if self.depth < 1 or self.width < 1:
            raise ValueError(f"depth and width must be >= 1, got {self.depth}, {self.width}")
        if self.kernel % 2 == 0:
            raise ValueError(f"Kernel size must be odd, got {self.kernel}")
        if self.scale != SCALE:
            raise ValueError(f"Only {SCALE}x upscaling is supported, got {self.scale}")

    def shapes(self) -> "OrderedDict[str, Tuple[int, ...]]":
        """파라미터 이름 → shape (저장 순서)"""
        k, r2 = self.kernel, self.scale * self.scale
        shapes = OrderedDict()
        channels = self.in_channels
        for i in range(self.depth):
            shapes[f"trunk.{i}.weight"] = (self.width, channels, k, k)
            shapes[f"trunk.{i}.bias"] = (self.width,)
            channels = self.width
        shapes["mean_head.weight"] = (self.in_channels * r2, self.width, k, k)
        shapes["mean_head.bias"] = (self.in_channels * r2,)
        shapes["var_head.weight"] = (self.variance_channels * r2, self.width, k, k)
        shapes["var_head.bias"] = (self.variance_channels * r2,)
        return shapes

    def to_dict(self) -> Dict:
        return {
            "in_channels": self.in_channels,
            "width": self.width,
            "depth": self.depth,
            "kernel": self.kernel,
            "scale": self.scale,
            "variance_channels": self.variance_channels,
        }

    @classmethod
    def infer(cls, shapes: Mapping[str, Tuple[int, ...]]) -> "NetworkDescriptor":
        """tensor shape에서 기술자 복원 (체크포인트 로드용)"""
        try:
            depth = sum(1 for name in shapes if name.startswith("trunk.") and name.endswith(".weight"))
            first = shapes["trunk.0.weight"]
            mean_out = shapes["mean_head.weight"][0]
            var_out = shapes["var_head.weight"][0]
        except KeyError as e:
            raise ShapeError(f"Parameter set is missing {e}") from e
        in_channels = first[1]
        scale = int(round(np.sqrt(mean_out / in_channels)))
        descriptor = cls(
            in_channels=in_channels,
            width=first[0],
            depth=depth,
            kernel=first[2],
            scale=scale,
            variance_channels=var_out // (scale * scale),
        )
        expected = descriptor.shapes()
        if dict(expected) != {k: tuple(v) for k, v in shapes.items()}:
            raise ShapeError(f"Tensor shapes are inconsistent with descriptor {descriptor.to_dict()}")
        return descriptor


@dataclass
class NetworkParams:
    """ζ: 이름 → Tensor 순서 있는 맵 + 기술자"""
    tensors: "OrderedDict[str, Tensor]"
    descriptor: NetworkDescriptor = field(default_factory=NetworkDescriptor)

    def __post_init__(self):
        expected = self.descriptor.shapes()
        if list(self.tensors.keys()) != list(expected.keys()):
            raise ShapeError(
                f"Parameter names {list(self.tensors.keys())} do not match descriptor"
            )
        for name, shape in expected.items():
            if self.tensors[name].dims != shape:
                raise ShapeError(f"{name}: expected dims {shape}, got {self.tensors[name].dims}")

    @classmethod
    def from_arrays(
        cls,
        arrays: Mapping[str, np.ndarray],
        descriptor: Optional[NetworkDescriptor] = None
    ) -> "NetworkParams":
        descriptor = descriptor or NetworkDescriptor.infer({k: np.shape(v) for k, v in arrays.items()})
        tensors = OrderedDict(
            (name, Tensor(arrays[name], name=name)) for name in descriptor.shapes()
        )
        return cls(tensors=tensors, descriptor=descriptor)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: t.values for name, t in self.tensors.items()}

    def replace(self, arrays: Mapping[str, np.ndarray]) -> "NetworkParams":
        """일부 파라미터 값을 바꾼 새 ζ"""
        merged = self.arrays()
        merged.update(arrays)
        return NetworkParams.from_arrays(merged, self.descriptor)

    @property
    def names(self) -> List[str]:
        return list(self.tensors.keys())

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())


@dataclass
class PredictiveOutput:
    """예측 평균 ŷ (4H×4W×3)와 분산 σ̂² (4H×4W×1)"""
    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.mean)):
            raise ValueError("Predictive mean must be finite")
        if not np.all(self.variance > 0) or not np.all(np.isfinite(self.variance)):
            raise ValueError("Predictive variance must be finite and strictly positive")
        if self.mean.shape[:2] != self.variance.shape[:2]:
            raise ShapeError(
                f"Mean {self.mean.shape} and variance {self.variance.shape} disagree spatially"
            )

    def mean_uncertainty(self) -> float:
        """⟨σ̂²⟩ 픽셀 평균"""
        return float(self.variance.mean(dtype=np.float64))


def _inverse_softplus(y: float) -> float:
    return float(np.log(np.expm1(y)))


def init_params(
    descriptor: Optional[NetworkDescriptor] = None,
    seed: int = 0
) -> NetworkParams:
    """
    seed 고정 He 초기화 (분산 head bias는 σ̂² ≈ 0.01이 되도록)

    Args:
        descriptor: 아키텍처 (기본: 3→32×4, 4× 업스케일)
        seed: 초기화 seed

    Returns:
        NetworkParams
    """
    descriptor = descriptor or NetworkDescriptor()
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, shape in descriptor.shapes().items():
        if name.endswith(".bias"):
            arrays[name] = np.zeros(shape)
            continue
        fan_in = int(np.prod(shape[1:]))
        std = np.sqrt(2.0 / fan_in)
        if name.startswith("mean_head"):
            std *= 0.1
        elif name.startswith("var_head"):
            std *= 0.01
        arrays[name] = rng.normal(0.0, std, size=shape)

    arrays["var_head.bias"] = np.full(
        descriptor.shapes()["var_head.bias"],
        _inverse_softplus(INITIAL_VARIANCE - VARIANCE_FLOOR),
    )
    params = NetworkParams.from_arrays(arrays, descriptor)
    logger.info(f"Initialized network: {params.num_parameters()} parameters, {descriptor.to_dict()}")
    return params


def forward_tensors(
    tensors: Mapping[str, Tensor],
    x: Tensor,
    descriptor: NetworkDescriptor,
    variance_floor: float = VARIANCE_FLOOR
) -> Tuple[Tensor, Tensor]:
    """
    tape 기록 가능한 forward

    Args:
        tensors: 이름 → 파라미터 텐서 (requires_grad 여부는 호출자가 결정)
        x: LR 입력 (N, C, H, W)
        descriptor: 아키텍처
        variance_floor: ε_v

    Returns:
        (평균 (N, C, 4H, 4W), 분산 (N, 1, 4H, 4W))
    """
    if len(x.dims) != 4 or x.dims[1] != descriptor.in_channels:
        raise ShapeError(
            f"Expected input (N, {descriptor.in_channels}, H, W), got {x.dims}"
        )
    if min(x.dims[2:]) < MIN_INPUT_SIDE:
        raise ShapeError(f"Input sides must be >= {MIN_INPUT_SIDE}, got {x.dims[2:]}")

    h = x
    for i in range(descriptor.depth):
        h = leaky_relu(
            conv2d(h, tensors[f"trunk.{i}.weight"], tensors[f"trunk.{i}.bias"]),
            LEAKY_SLOPE,
        )

    residual = pixel_shuffle(
        conv2d(h, tensors["mean_head.weight"], tensors["mean_head.bias"]), descriptor.scale
    )
    mean = add(residual, Tensor(upsample_nearest_4x(x.values)))

    raw = pixel_shuffle(
        conv2d(h, tensors["var_head.weight"], tensors["var_head.bias"]), descriptor.scale
    )
    variance = add(softplus(raw), variance_floor)
    return mean, variance


def to_nchw(images: Sequence[np.ndarray]) -> np.ndarray:
    """(H, W, C) 이미지 리스트 → (N, C, H, W) 배치"""
    shapes = {np.shape(img) for img in images}
    if len(shapes) != 1:
        raise ShapeError(f"Batch images must share a shape, got {sorted(shapes)}")
    return np.stack([np.asarray(img).transpose(2, 0, 1) for img in images])


def forward_batch(
    params: NetworkParams,
    images: Sequence[np.ndarray],
    variance_floor: float = VARIANCE_FLOOR
) -> List[PredictiveOutput]:
    """동일 크기 LR 이미지 배치 추론"""
    batch = Tensor(to_nchw([as_image(img, name="lr") for img in images]))
    mean, variance = forward_tensors(params.tensors, batch, params.descriptor, variance_floor)
    means = mean.values.transpose(0, 2, 3, 1)
    variances = variance.values.transpose(0, 2, 3, 1)
    return [PredictiveOutput(mean=m, variance=v) for m, v in zip(means, variances)]


def forward(
    params: NetworkParams,
    x: np.ndarray,
    variance_floor: float = VARIANCE_FLOOR
) -> PredictiveOutput:
    """
    단일 LR 이미지 추론

    Args:
        params: ζ
        x: (H, W, 3) LR 이미지, H, W >= 8
        variance_floor: ε_v

    Returns:
        PredictiveOutput
    """
    return forward_batch(params, [x], variance_floor)[0]


def predict_in_chunks(
    params: NetworkParams,
    images: Sequence[np.ndarray],
    batch_size: int = 16,
    variance_floor: float = VARIANCE_FLOOR
) -> List[PredictiveOutput]:
    """크기별로 묶어 chunk 단위 추론 (입력 순서 유지)"""
    outputs: List[Optional[PredictiveOutput]] = [None] * len(images)
    groups: Dict[Tuple[int, ...], List[int]] = {}
    for index, img in enumerate(images):
        groups.setdefault(np.shape(img), []).append(index)
    for indices in groups.values():
        for start in range(0, len(indices), batch_size):
            chunk = indices[start:start + batch_size]
            preds = forward_batch(params, [images[i] for i in chunk], variance_floor)
            for i, pred in zip(chunk, preds):
                outputs[i] = pred
    return outputs
