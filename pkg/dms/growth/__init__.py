# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .growth import (
    ClassSearch,
    GrowthClass,
    GrowthFunction,
    certify_membership,
    g_of_ell_growth,
    growth_bound_rhs,
    growth_class_diagnostics,
    growth_from_config,
    power_growth,
    restrict_growth,
    search_weight_integral_class,
    table_growth,
    unit_growth,
    weight_integral_growth,
)

__all__ = [
    "ClassSearch",
    "GrowthClass",
    "GrowthFunction",
    "certify_membership",
    "g_of_ell_growth",
    "growth_bound_rhs",
    "growth_class_diagnostics",
    "growth_from_config",
    "power_growth",
    "restrict_growth",
    "search_weight_integral_class",
    "table_growth",
    "unit_growth",
    "weight_integral_growth",
]
