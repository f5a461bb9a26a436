"""Image IO, low(·), manifests, splits and target-domain corpora"""

from .transforms import (
    SCALE,
    LabeledPair,
    as_image,
    downsample_4x,
    rescale_unit,
    upsample_nearest_4x,
)
from .image_io import load_image, load_raw, save_image, save_raw
from .manifest import (
    DatasetManifest,
    ManifestEntry,
    read_manifest,
    split_manifest,
    write_manifest,
    write_pair,
)
from .corpus import CorpusKind, generate_domain_images, make_domain_corpus, make_pool_from_dir

__all__ = [
    "SCALE",
    "LabeledPair",
    "as_image",
    "downsample_4x",
    "rescale_unit",
    "upsample_nearest_4x",
    "load_image",
    "load_raw",
    "save_image",
    "save_raw",
    "DatasetManifest",
    "ManifestEntry",
    "read_manifest",
    "split_manifest",
    "write_manifest",
    "write_pair",
    "CorpusKind",
    "generate_domain_images",
    "make_domain_corpus",
    "make_pool_from_dir",
]
