# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .utils import (
    cartesian_product,
    exact_order_indices,
    hermitian_part,
    is_almost_hermitian,
    mixed_difference,
    multi_indices,
    resolve_workers,
)

__all__ = [
    "cartesian_product",
    "exact_order_indices",
    "hermitian_part",
    "is_almost_hermitian",
    "mixed_difference",
    "multi_indices",
    "resolve_workers",
]
