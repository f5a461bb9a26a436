"""Statistical image models: spectrum, wavelet marginals, color histograms"""

from .params import (
    ColorHistParams,
    GeneratorConfig,
    ImageModel,
    SpectrumParams,
    WMMParams,
    max_scales,
    sample_params,
)
from .spectrum import gen_spectrum_image
from .wavelet import WaveletPyramid, gen_wmm_image, match_bands
from .color import apply_color, palette_indices
from .generator import SyntheticSample, gen_combined, gen_dataset, generate_pair, sample_image
from .analysis import estimate_power_spectrum_slope

__all__ = [
    "ColorHistParams",
    "GeneratorConfig",
    "ImageModel",
    "SpectrumParams",
    "WMMParams",
    "max_scales",
    "sample_params",
    "gen_spectrum_image",
    "WaveletPyramid",
    "gen_wmm_image",
    "match_bands",
    "apply_color",
    "palette_indices",
    "SyntheticSample",
    "gen_combined",
    "gen_dataset",
    "generate_pair",
    "sample_image",
    "estimate_power_spectrum_slope",
]
