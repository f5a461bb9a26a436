"""
Image IO

8-bit PNG 입출력과 무손실 raw 텐서 사이드카("UDT1") 포맷
"""

import logging
import os
import struct
from pathlib import Path
from typing import List, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.data.transforms import as_image
from src.errors import ImageIOError, UnsupportedImageError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RAW_MAGIC = b"UDT1"
RAW_SUFFIX = ".udt"
_UNSUPPORTED_MODES = {"I;16", "I;16B", "I;16L", "I;16N", "I", "F"}


def sidecar_path(path: PathLike) -> Path:
    """PNG 경로에 대응하는 raw 사이드카 경로"""
    return Path(path).with_suffix(RAW_SUFFIX)


def save_raw(path: PathLike, tensor: np.ndarray) -> Path:
    """
    raw 텐서 저장: magic, rank u8, dims u32, float32 값 (모두 little-endian)
    """
    path = Path(path)
    arr = np.ascontiguousarray(tensor, dtype="<f4")
    header = RAW_MAGIC + struct.pack("<B", arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.tobytes(order="C"))
    return path


def load_raw(path: PathLike) -> np.ndarray:
    """raw 텐서 로드 (저장 값 그대로)"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ImageIOError(f"Cannot read {path}: {e}") from e

    if len(data) < 5 or data[:4] != RAW_MAGIC:
        raise ImageIOError(f"{path}: not a UDT1 tensor file")
    rank = data[4]
    offset = 5 + 4 * rank
    if len(data) < offset:
        raise ImageIOError(f"{path}: truncated header")
    dims = struct.unpack(f"<{rank}I", data[5:offset])
    count = int(np.prod(dims)) if rank else 1
    if len(data) != offset + 4 * count:
        raise ImageIOError(
            f"{path}: expected {count} values, file holds {(len(data) - offset) // 4}"
        )
    values = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
    return values.reshape(dims).astype(np.float32)


def save_image(path: PathLike, image: np.ndarray, lossless: bool = False) -> List[Path]:
    """
    이미지 저장 (8-bit PNG, lossless이면 raw 사이드카 추가)

    Args:
        path: PNG 경로
        image: (H, W, C) [0,1] 이미지
        lossless: raw 사이드카 동시 저장 여부

    Returns:
        기록된 파일 경로 리스트
    """
    path = Path(path)
    image = as_image(image, name=str(path))
    path.parent.mkdir(parents=True, exist_ok=True)

    quantized = np.round(image * 255.0).astype(np.uint8)
    if quantized.shape[2] == 1:
        pil = Image.fromarray(quantized[:, :, 0])
    else:
        pil = Image.fromarray(quantized)

    try:
        pil.save(path, format="PNG")
    except OSError as e:
        raise ImageIOError(f"Cannot write {path}: {e}") from e

    written = [path]
    if lossless:
        written.append(save_raw(sidecar_path(path), image))
    return written


def load_image(path: PathLike, prefer_lossless: bool = True) -> np.ndarray:
    """
    이미지 로드

    Args:
        path: PNG 또는 .udt 경로
        prefer_lossless: PNG 옆에 사이드카가 있으면 사이드카를 읽음

    Returns:
        (H, W, C) float32 이미지 (PNG는 v/255)
    """
    path = Path(path)
    if path.suffix == RAW_SUFFIX:
        return as_image(load_raw(path), name=str(path))

    raw = sidecar_path(path)
    if prefer_lossless and raw.exists():
        return as_image(load_raw(raw), name=str(raw))

    if not path.exists():
        raise ImageIOError(f"Image not found: {path}")

    try:
        with Image.open(path) as pil:
            pil.load()
            if pil.mode in _UNSUPPORTED_MODES:
                raise UnsupportedImageError(
                    f"{path}: unsupported bit depth (mode {pil.mode}); only 8-bit PNG is supported"
                )
            if pil.mode not in ("L", "RGB"):
                pil = pil.convert("L" if pil.mode in ("1", "LA") else "RGB")
            arr = np.asarray(pil, dtype=np.uint8)
    except UnsupportedImageError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise ImageIOError(f"Cannot decode {path}: {e}") from e

    return as_image(arr.astype(np.float32) / 255.0, name=str(path))


def atomic_write_text(path: PathLike, text: str) -> Path:
    """임시 파일에 쓴 뒤 rename"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)
    return path
