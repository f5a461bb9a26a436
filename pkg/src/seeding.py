"""Seed derivation shared by generators, splits and experiment cells"""

import hashlib
from typing import Sequence, Union

import numpy as np

SEED_MASK = (1 << 63) - 1


def derive_seed(seed: int, *keys: Union[int, str]) -> int:
    """
    상위 seed와 인덱스/태그로부터 독립적인 63-bit seed 생성

    Args:
        seed: 상위 seed
        *keys: 정수 인덱스 또는 문자열 태그

    Returns:
        매니페스트에 기록 가능한 0 이상 정수 seed
    """
    spawn_key = tuple(_key_to_int(k) for k in keys)
    state = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return int(state.generate_state(1, dtype=np.uint64)[0]) & SEED_MASK


def make_rng(seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """derive_seed 기반 Generator"""
    return np.random.default_rng(derive_seed(seed, *keys) if keys else int(seed))


def _key_to_int(key: Union[int, str]) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def spawn_seeds(seed: int, count: int) -> Sequence[int]:
    """seed 하나에서 count개의 per-item seed 생성"""
    return [derive_seed(seed, i) for i in range(count)]
