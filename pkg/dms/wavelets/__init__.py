# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .bandlimited import BandlimitedPair, build_bandlimited_pair, bump
from .daubechies import (
    K0,
    CascadeSamples,
    FilterPair,
    cascade_samples,
    daubechies_filter,
    find_k0,
    orthonormality_residual,
    two_scale_residual,
)
from .transform import (
    SampledFunction,
    WaveletCoeffs,
    WaveletSystem,
    analyze,
    check_resolution,
    coeffs_norm,
    gram_residual,
    minimal_wavelet_order,
    moment_residual,
    scaling_integral,
    synthesize,
    wavelet_types,
)

__all__ = [
    "BandlimitedPair",
    "CascadeSamples",
    "FilterPair",
    "K0",
    "SampledFunction",
    "WaveletCoeffs",
    "WaveletSystem",
    "analyze",
    "build_bandlimited_pair",
    "bump",
    "cascade_samples",
    "check_resolution",
    "coeffs_norm",
    "daubechies_filter",
    "find_k0",
    "gram_residual",
    "minimal_wavelet_order",
    "moment_residual",
    "orthonormality_residual",
    "scaling_integral",
    "synthesize",
    "two_scale_residual",
    "wavelet_types",
]
