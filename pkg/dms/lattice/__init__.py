# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .cubes import (
    Box,
    DyadicCube,
    LatticeWindow,
    check_window,
    contains,
    cubes_to_array,
    make_cube,
    pairwise_scaled_distance,
    scaled_distance,
)
from .trace_geometry import (
    ShadowCube,
    lift,
    middle_band,
    middle_band_of,
    project,
    shadow_cube,
    shadow_ratio,
)

__all__ = [
    "Box",
    "DyadicCube",
    "LatticeWindow",
    "ShadowCube",
    "check_window",
    "contains",
    "cubes_to_array",
    "lift",
    "make_cube",
    "middle_band",
    "middle_band_of",
    "pairwise_scaled_distance",
    "project",
    "scaled_distance",
    "shadow_cube",
    "shadow_ratio",
]
