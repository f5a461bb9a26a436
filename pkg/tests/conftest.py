"""
Pytest configuration and shared fixtures
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.data.corpus import make_domain_corpus  # noqa: E402
from src.data.transforms import LabeledPair  # noqa: E402
from src.model.network import NetworkDescriptor, init_params  # noqa: E402
from src.simgen.generator import gen_dataset  # noqa: E402
from src.simgen.params import GeneratorConfig  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 수 분 이상 걸리는 acceptance 테스트")


@pytest.fixture
def rng():
    """테스트별 Generator"""
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_descriptor():
    """빠른 테스트용 좁은 네트워크"""
    return NetworkDescriptor(width=8, depth=2)


@pytest.fixture(scope="session")
def small_params(small_descriptor):
    """초기화된 좁은 네트워크 파라미터"""
    return init_params(small_descriptor, seed=7)


@pytest.fixture
def make_pairs():
    """(H, W) HR 크기의 무작위 LabeledPair 생성 함수"""
    def _make(count, size=(32, 32), seed=0, prefix="pair"):
        rng = np.random.default_rng(seed)
        return [
            LabeledPair.from_hr(rng.random((size[0], size[1], 3)), sample_id=f"{prefix}_{i:03d}")
            for i in range(count)
        ]
    return _make


@pytest.fixture(scope="session")
def sim_dataset(tmp_path_factory):
    """디스크에 기록된 작은 합성 데이터셋 (32×32, 24쌍)"""
    out_dir = tmp_path_factory.mktemp("sim")
    cfg = GeneratorConfig(model_mix=(0.4, 0.3, 0.3), image_size=(32, 32), seed=3)
    gen_dataset(cfg, 24, out_dir=out_dir)
    return out_dir / "manifest.csv"


@pytest.fixture(scope="session")
def domain_corpus(tmp_path_factory):
    """디스크에 기록된 작은 도메인 코퍼스 (32×32, pool 16 + test 4)"""
    out_dir = tmp_path_factory.mktemp("domain")
    make_domain_corpus("mosaics", 20, (32, 32), seed=5, out_dir=out_dir)
    return out_dir / "manifest.csv"
