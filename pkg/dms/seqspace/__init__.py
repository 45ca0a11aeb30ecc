# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .norms import (
    BoxLayers,
    ConstantLayers,
    LayerMagnitudes,
    NormReport,
    SampledLayers,
    averaging_layers,
    averaging_norm,
    eq_set_layers,
    eq_set_norm,
    la_norm,
    norm_breakdown,
    unweighted_layers,
    unweighted_norm,
    weighted_layers,
    weighted_norm,
)
from .sequences import (
    B_FAMILY,
    F_FAMILY,
    CoeffSequence,
    LayerFunction,
    SpaceParams,
    check_space_params,
    layer,
    make_space_params,
    random_ensemble,
    random_sequence,
    space_params_diagnostics,
)

__all__ = [
    "B_FAMILY",
    "BoxLayers",
    "CoeffSequence",
    "ConstantLayers",
    "F_FAMILY",
    "LayerFunction",
    "LayerMagnitudes",
    "NormReport",
    "SampledLayers",
    "SpaceParams",
    "averaging_layers",
    "averaging_norm",
    "check_space_params",
    "eq_set_layers",
    "eq_set_norm",
    "la_norm",
    "layer",
    "make_space_params",
    "norm_breakdown",
    "random_ensemble",
    "random_sequence",
    "space_params_diagnostics",
    "unweighted_layers",
    "unweighted_norm",
    "weighted_layers",
    "weighted_norm",
]
