"""
Test cases for image IO, low(·), manifests and domain corpora
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from src.data.corpus import (
    CorpusKind,
    center_crop_to_multiple,
    generate_domain_images,
    load_split,
    make_domain_corpus,
    make_pool_from_dir,
)
from src.data.image_io import (
    atomic_write_text,
    load_image,
    load_raw,
    save_image,
    save_raw,
    sidecar_path,
)
from src.data.manifest import (
    DatasetManifest,
    ManifestEntry,
    merge_manifests,
    read_manifest,
    split_manifest,
    write_manifest,
    write_pair,
)
from src.data.transforms import (
    LabeledPair,
    as_image,
    downsample_4x,
    rescale_unit,
    upsample_nearest_4x,
)
from src.errors import ConfigError, ImageIOError, ManifestError, ShapeError, UnsupportedImageError
from src.simgen.analysis import estimate_power_spectrum_slope
from src.simgen.generator import sample_image
from src.simgen.params import GeneratorConfig


def _entries(n, split="pool"):
    return [ManifestEntry(id=f"s{i:02d}", split=split, lr_path=f"lr/s{i:02d}.png") for i in range(n)]


class TestTransforms:
    """as_image, low(·), 업샘플링 테스트"""

    def test_as_image_adds_channel(self):
        """(H, W) → (H, W, 1) float32"""
        out = as_image(np.zeros((4, 5)))
        assert out.shape == (4, 5, 1)
        assert out.dtype == np.float32

    def test_as_image_rejects(self):
        """채널 수, 범위, 비유한 값 검증"""
        with pytest.raises(ShapeError):
            as_image(np.zeros((4, 4, 2)))
        with pytest.raises(ValueError):
            as_image(np.full((4, 4, 3), 1.5))
        with pytest.raises(ValueError):
            as_image(np.full((4, 4, 3), np.nan))

    def test_downsample_block_mean(self, rng):
        """LR 픽셀 = 대응 4×4 블록 평균"""
        hr = rng.random((8, 12, 3)).astype(np.float32)
        lr = downsample_4x(hr)
        assert lr.shape == (2, 3, 3)
        for i in range(2):
            for j in range(3):
                for c in range(3):
                    expected = hr[4 * i:4 * i + 4, 4 * j:4 * j + 4, c].astype(np.float64).mean()
                    assert abs(lr[i, j, c] - expected) <= 1e-6

    def test_downsample_constant(self):
        """상수 이미지 → 같은 상수의 LR"""
        lr = downsample_4x(np.full((16, 16, 3), 0.3, dtype=np.float32))
        np.testing.assert_allclose(lr, 0.3, atol=1e-6)

    def test_downsample_not_divisible(self):
        """4의 배수가 아닌 크기 거부"""
        with pytest.raises(ShapeError):
            downsample_4x(np.zeros((10, 8, 3)))

    def test_upsample_nearest(self):
        """HWC와 NCHW 모두 블록 복제"""
        lr = np.arange(4, dtype=np.float32).reshape(2, 2, 1)
        up = upsample_nearest_4x(lr)
        assert up.shape == (8, 8, 1)
        assert up[5, 2, 0] == lr[1, 0, 0]
        nchw = upsample_nearest_4x(np.zeros((2, 3, 2, 2)))
        assert nchw.shape == (2, 3, 8, 8)

    def test_rescale_unit(self):
        """min → 0, max → 1, 상수 → 0"""
        out = rescale_unit(np.array([[2.0, 4.0], [3.0, 6.0]]))
        assert out.min() == 0.0 and out.max() == 1.0
        np.testing.assert_array_equal(rescale_unit(np.full((3, 3), 7.0)), 0.0)

    def test_labeled_pair_shape_check(self):
        """HR이 LR의 4배가 아니면 거부"""
        with pytest.raises(ShapeError):
            LabeledPair(lr=np.zeros((4, 4, 3)), hr=np.zeros((12, 16, 3)))

    def test_labeled_pair_from_hr(self, rng):
        """from_hr는 low(·) 적용"""
        pair = LabeledPair.from_hr(rng.random((16, 16, 3)), sample_id="x")
        np.testing.assert_array_equal(pair.lr, downsample_4x(pair.hr))


class TestImageIO:
    """PNG / raw 사이드카 테스트"""

    def test_png_roundtrip_quantized(self, tmp_path, rng):
        """PNG는 1/255 양자화 오차 이내"""
        image = rng.random((8, 8, 3)).astype(np.float32)
        save_image(tmp_path / "a.png", image)
        loaded = load_image(tmp_path / "a.png")
        assert loaded.shape == (8, 8, 3)
        assert np.abs(loaded - image).max() <= 0.5 / 255 + 1e-6

    def test_lossless_sidecar_exact(self, tmp_path, rng):
        """사이드카가 있으면 값이 정확히 보존됨"""
        image = rng.random((8, 8, 3)).astype(np.float32)
        written = save_image(tmp_path / "a.png", image, lossless=True)
        assert sidecar_path(tmp_path / "a.png") in written
        np.testing.assert_array_equal(load_image(tmp_path / "a.png"), image)
        assert np.abs(load_image(tmp_path / "a.png", prefer_lossless=False) - image).max() > 0

    def test_grayscale_png(self, tmp_path):
        """1채널 이미지 → mode L"""
        save_image(tmp_path / "g.png", np.full((4, 4, 1), 1.0))
        assert load_image(tmp_path / "g.png").shape == (4, 4, 1)

    def test_raw_header_validation(self, tmp_path):
        """잘린 raw 파일 거부"""
        path = save_raw(tmp_path / "t.udt", np.ones((2, 3), dtype=np.float32))
        np.testing.assert_array_equal(load_raw(path), np.ones((2, 3)))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ImageIOError):
            load_raw(path)
        (tmp_path / "bad.udt").write_bytes(b"XXXX\x00")
        with pytest.raises(ImageIOError, match="not a UDT1"):
            load_raw(tmp_path / "bad.udt")

    def test_missing_and_corrupt(self, tmp_path):
        """없는 파일과 손상된 PNG는 ImageIOError"""
        with pytest.raises(ImageIOError):
            load_image(tmp_path / "missing.png")
        (tmp_path / "broken.png").write_bytes(b"not a png")
        with pytest.raises(ImageIOError):
            load_image(tmp_path / "broken.png")

    def test_sixteen_bit_rejected(self, tmp_path):
        """16-bit PNG는 UnsupportedImageError"""
        Image.fromarray(np.full((4, 4), 1000, dtype=np.uint16)).save(tmp_path / "deep.png")
        with pytest.raises(UnsupportedImageError):
            load_image(tmp_path / "deep.png")

    def test_atomic_write_text(self, tmp_path):
        """임시 파일 없이 최종 파일만 남음"""
        path = atomic_write_text(tmp_path / "sub" / "x.txt", "hello\n")
        assert path.read_text() == "hello\n"
        assert [p.name for p in path.parent.iterdir()] == ["x.txt"]


class TestManifest:
    """매니페스트 입출력과 분할 테스트"""

    def test_write_read(self, tmp_path, make_pairs):
        """기록 후 읽으면 같은 항목"""
        entries = [write_pair(tmp_path, p, "pool", seed=i, source="t") for i, p in enumerate(make_pairs(3))]
        manifest = DatasetManifest(entries=entries, root=tmp_path)
        write_manifest(manifest, tmp_path / "manifest.csv")

        text = (tmp_path / "manifest.csv").read_text()
        assert text.startswith("# schema_version=1\n")
        loaded = read_manifest(tmp_path / "manifest.csv")
        assert loaded.entries == manifest.entries
        assert loaded.content_hash() == manifest.content_hash()
        assert len(loaded.load_pairs()) == 3

    def test_duplicate_ids(self):
        """중복 id 거부"""
        with pytest.raises(ManifestError, match="Duplicate"):
            DatasetManifest(entries=_entries(2) + _entries(1))

    def test_unknown_split(self):
        """알 수 없는 split 거부"""
        with pytest.raises(ManifestError):
            DatasetManifest(entries=[ManifestEntry(id="a", split="val", lr_path="a.png")])

    def test_missing_header(self, tmp_path):
        """schema 헤더 없는 파일 거부"""
        (tmp_path / "m.csv").write_text("id,split,lr_path,hr_path,seed,source\n")
        with pytest.raises(ManifestError, match="schema"):
            read_manifest(tmp_path / "m.csv")

    def test_unsupported_version(self, tmp_path):
        """다른 schema 버전 거부"""
        (tmp_path / "m.csv").write_text("# schema_version=2\nid,split,lr_path,hr_path,seed,source\n")
        with pytest.raises(ManifestError, match="version"):
            read_manifest(tmp_path / "m.csv")

    def test_missing_file_detected(self, tmp_path):
        """참조 파일 누락 감지"""
        write_manifest(DatasetManifest(entries=_entries(1), root=tmp_path), tmp_path / "m.csv")
        with pytest.raises(ManifestError, match="Missing file"):
            read_manifest(tmp_path / "m.csv")
        assert len(read_manifest(tmp_path / "m.csv", check_files=False)) == 1

    def test_load_pair_without_hr(self):
        """HR 경로가 없는 항목은 쌍으로 읽을 수 없음"""
        manifest = DatasetManifest(entries=_entries(1))
        with pytest.raises(ManifestError, match="no HR"):
            manifest.load_pair(manifest.entries[0])

    def test_split_disjoint_and_covering(self):
        """분할은 서로소이고 전체를 덮으며 seed에 대해 결정적"""
        manifest = DatasetManifest(entries=_entries(10))
        parts = split_manifest(manifest, {"pool": 0.7, "test": 0.3}, seed=3)
        assert len(parts["pool"]) == 7 and len(parts["test"]) == 3
        assert set(parts["pool"].ids).isdisjoint(parts["test"].ids)
        assert set(parts["pool"].ids) | set(parts["test"].ids) == set(manifest.ids)
        again = split_manifest(manifest, {"pool": 0.7, "test": 0.3}, seed=3)
        assert again["test"].ids == parts["test"].ids
        assert all(e.split == "test" for e in parts["test"].entries)

    @given(
        n=st.integers(min_value=10, max_value=60),
        ratio=st.floats(min_value=0.1, max_value=0.9),
        seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_split_partition_law(self, n, ratio, seed):
        """임의의 N, 비율, seed에서 분할은 전체의 서로소 분할이고 크기는 N·비율과 1 미만 차이"""
        manifest = DatasetManifest(entries=_entries(n))
        parts = split_manifest(manifest, {"pool": 1.0 - ratio, "test": ratio}, seed=seed)
        pool, test = set(parts["pool"].ids), set(parts["test"].ids)
        assert pool.isdisjoint(test)
        assert pool | test == set(manifest.ids)
        assert abs(len(test) - n * ratio) < 1.0

    def test_split_validation(self):
        """비율 합, 빈 split, 알 수 없는 이름 거부"""
        manifest = DatasetManifest(entries=_entries(2))
        with pytest.raises(ConfigError):
            split_manifest(manifest, {"pool": 0.5, "test": 0.4}, seed=0)
        with pytest.raises(ConfigError, match="empty"):
            split_manifest(manifest, {"pool": 0.99, "test": 0.01}, seed=0)
        with pytest.raises(ConfigError):
            split_manifest(manifest, {"val": 1.0}, seed=0)

    def test_merge_and_subset(self):
        """병합 후 부분 집합은 요청 순서를 따름"""
        merged = merge_manifests(
            DatasetManifest(entries=_entries(2)),
            DatasetManifest(entries=[ManifestEntry(id="t0", split="test", lr_path="t0.png")]),
        )
        assert merged.ids == ["s00", "s01", "t0"]
        assert merged.subset(["t0", "s00"]).ids == ["t0", "s00"]
        with pytest.raises(KeyError):
            merged.get("nope")


class TestCorpus:
    """도메인 코퍼스 테스트"""

    @pytest.mark.parametrize("kind", list(CorpusKind))
    def test_generators_range(self, kind):
        """각 종류: (H, W, 3) [0, 1], seed 고정 시 동일"""
        first = generate_domain_images(kind, 2, (16, 24), seed=1)
        second = generate_domain_images(kind, 2, (16, 24), seed=1)
        for (a, sa), (b, sb) in zip(first, second):
            assert a.shape == (16, 24, 3)
            assert a.min() >= 0.0 and a.max() <= 1.0
            assert sa == sb
            np.testing.assert_array_equal(a, b)

    def test_size_validation(self):
        """4의 배수가 아닌 크기 거부"""
        with pytest.raises(ConfigError):
            generate_domain_images("textures", 1, (30, 32), seed=0)
        with pytest.raises(ValueError):
            generate_domain_images("clouds", 1, (32, 32), seed=0)

    def test_domain_corpus_fixture(self, domain_corpus):
        """pool 16 + test 4, 모든 파일 존재"""
        manifest = read_manifest(domain_corpus)
        assert len(manifest.select("pool")) == 16
        assert len(manifest.select("test")) == 4
        assert all(e.source == "mosaics" for e in manifest.entries)
        assert load_split(domain_corpus, "train") is None

    def test_corpus_deterministic(self, tmp_path):
        """같은 seed → 같은 매니페스트 해시"""
        a = make_domain_corpus("gradients", 5, (16, 16), seed=2, out_dir=tmp_path / "a")
        b = make_domain_corpus("gradients", 5, (16, 16), seed=2, out_dir=tmp_path / "b")
        assert a.content_hash() == b.content_hash()

    def test_spectral_shift_from_sim(self):
        """textures 코퍼스의 평균 power-spectrum 기울기는 SIM spectrum 코퍼스와 0.3 이상 차이"""
        cfg = GeneratorConfig(model_mix=(1.0, 0.0, 0.0), image_size=(64, 64), seed=0)
        sim_slopes = [
            estimate_power_spectrum_slope(sample_image(cfg, np.random.default_rng(s)).image)
            for s in range(20)
        ]
        domain_slopes = [
            estimate_power_spectrum_slope(image)
            for image, _ in generate_domain_images("textures", 20, (64, 64), seed=0)
        ]
        assert abs(np.mean(domain_slopes) - np.mean(sim_slopes)) > 0.3

    def test_test_ratio_validation(self, tmp_path):
        """test_ratio ∈ [0, 1)"""
        with pytest.raises(ConfigError):
            make_domain_corpus("textures", 4, (16, 16), seed=0, out_dir=tmp_path, test_ratio=1.0)

    def test_center_crop(self):
        """배수로 중앙 crop"""
        assert center_crop_to_multiple(np.zeros((18, 21, 3))).shape == (16, 20, 3)
        with pytest.raises(ConfigError):
            center_crop_to_multiple(np.zeros((3, 8, 3)))

    def test_pool_from_dir(self, tmp_path, rng):
        """사용자 PNG 디렉토리 ingest (gray는 3채널로 확장)"""
        src = tmp_path / "set5"
        src.mkdir()
        for i in range(5):
            save_image(src / f"img{i}.png", rng.random((18, 22, 1 if i == 0 else 3)))
        manifest = make_pool_from_dir(src, tmp_path / "out", test_ratio=0.4, seed=1)
        assert len(manifest) == 5
        assert len(manifest.select("test")) == 2
        pair = manifest.load_pair(manifest.get("img0"))
        assert pair.hr.shape == (16, 20, 3)

    def test_pool_from_empty_dir(self, tmp_path):
        """이미지 없는 디렉토리 거부"""
        with pytest.raises(ManifestError):
            make_pool_from_dir(tmp_path, tmp_path / "out")
