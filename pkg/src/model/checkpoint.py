"""
Checkpoint Codec

"UDC1": magic, version u16, tensor 개수 u32, tensor별 (이름 길이 u16, 이름, rank u8,
dims u32..., float32 값), 마지막 CRC32. 모든 정수/실수는 little-endian.
"""

import logging
import os
import struct
import zlib
from collections import OrderedDict
from pathlib import Path
from typing import Union

import numpy as np

from src.errors import CheckpointError, ShapeError
from src.model.network import NetworkDescriptor, NetworkParams

logger = logging.getLogger(__name__)

MAGIC = b"UDC1"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


def encode_params(params: NetworkParams) -> bytes:
    """ζ → UDC1 바이트열"""
    chunks = [MAGIC, struct.pack("<HI", FORMAT_VERSION, len(params.tensors))]
    for name, tensor in params.tensors.items():
        encoded = name.encode("utf-8")
        values = np.ascontiguousarray(tensor.values, dtype="<f4")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", values.ndim))
        chunks.append(struct.pack(f"<{values.ndim}I", *values.shape))
        chunks.append(values.tobytes(order="C"))
    body = b"".join(chunks)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def decode_params(data: bytes, source: str = "<bytes>") -> NetworkParams:
    """UDC1 바이트열 → ζ (기술자는 shape에서 복원)"""
    if len(data) < 14 or data[:4] != MAGIC:
        raise CheckpointError(f"{source}: not a UDC1 checkpoint")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise CheckpointError(f"{source}: CRC mismatch (corrupt checkpoint)")

    version, count = struct.unpack_from("<HI", body, 4)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{source}: unsupported checkpoint version {version}")

    offset = 10
    arrays = OrderedDict()
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", body, offset)
            offset += 2
            name = body[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<B", body, offset)
            offset += 1
            dims = struct.unpack_from(f"<{rank}I", body, offset)
            offset += 4 * rank
            size = int(np.prod(dims)) if rank else 1
            values = np.frombuffer(body, dtype="<f4", count=size, offset=offset)
            offset += 4 * size
            arrays[name] = values.reshape(dims).astype(np.float32)
    except (struct.error, ValueError, UnicodeDecodeError) as e:
        raise CheckpointError(f"{source}: truncated or malformed checkpoint ({e})") from e
    if offset != len(body):
        raise CheckpointError(f"{source}: {len(body) - offset} trailing bytes before CRC")

    try:
        descriptor = NetworkDescriptor.infer({k: v.shape for k, v in arrays.items()})
        return NetworkParams.from_arrays(arrays, descriptor)
    except (ShapeError, ValueError) as e:
        raise CheckpointError(f"{source}: {e}") from e


def save_checkpoint(params: NetworkParams, path: PathLike) -> Path:
    """
    체크포인트 저장 (임시 파일 + rename)

    Args:
        params: 저장할 ζ
        path: 출력 경로

    Returns:
        기록된 경로
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        with open(tmp, "wb") as f:
            f.write(encode_params(params))
        os.replace(tmp, path)
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info(f"Checkpoint saved to {path}")
    return path


def load_checkpoint(path: PathLike) -> NetworkParams:
    """체크포인트 로드"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    params = decode_params(data, source=str(path))
    logger.info(f"Checkpoint loaded from {path}")
    return params
