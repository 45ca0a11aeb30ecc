# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .apinf import (
    DimensionEstimate,
    DimensionPair,
    apinf_box_value,
    apinf_characteristic,
    apinf_cube_value,
    dimension_estimate,
    estimate_dimensions,
)
from .ellipsoid import MinimumVolumeEllipsoid
from .linalg import batch_mat_power, jacobi_eigh, mat_power, operator_norms
from .quadrature import QuadratureSpec, check_quadrature, dilate
from .reducing import (
    EllipsoidFitSpec,
    ReducingFamily,
    ReducingFit,
    cube_norms,
    reducing_family,
    reducing_growth_certificate,
    reducing_operator,
    reducing_operator_fit,
)
from .weights import (
    MatrixWeight,
    callable_weight,
    constant_weight,
    diag_power_weight,
    grid_weight,
    identity_weight,
    scalar_power_weight,
    weight_from_config,
)

__all__ = [
    "DimensionEstimate",
    "DimensionPair",
    "EllipsoidFitSpec",
    "MatrixWeight",
    "MinimumVolumeEllipsoid",
    "QuadratureSpec",
    "ReducingFamily",
    "ReducingFit",
    "apinf_box_value",
    "apinf_characteristic",
    "apinf_cube_value",
    "batch_mat_power",
    "callable_weight",
    "check_quadrature",
    "constant_weight",
    "cube_norms",
    "diag_power_weight",
    "dilate",
    "dimension_estimate",
    "estimate_dimensions",
    "grid_weight",
    "identity_weight",
    "jacobi_eigh",
    "mat_power",
    "operator_norms",
    "reducing_family",
    "reducing_growth_certificate",
    "reducing_operator",
    "reducing_operator_fit",
    "scalar_power_weight",
    "weight_from_config",
]
