# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .czo import (
    AtomImage,
    CZKResiduals,
    CZOParameters,
    CZOReport,
    KernelHandle,
    atom_image_handle,
    atom_moment_order,
    czk_condition_residuals,
    czo_atom_image_experiment,
    czo_parameters,
    hilbert_kernel,
    kernel_from_config,
    riesz_kernel,
)
from .psido import (
    KernelProbes,
    ProbeSet,
    PsidoReport,
    SymbolHandle,
    abs_power_symbol,
    adjoint_moment_residual,
    identity_symbol,
    psido_apply,
    psido_handle,
    psido_molecule_experiment,
    sampled_psido,
    sin_abs_symbol,
    symbol_class_residual,
    symbol_from_config,
)
from .trace import (
    EXTENSION,
    TRACE,
    TraceExperiment,
    TraceReport,
    ext_coeffs,
    sequence_to_coeffs,
    slice_coeffs,
    trace_coeffs,
    trace_norm_experiment,
    trace_smoothness_index,
    weight_compat_certificate,
)

__all__ = [
    "AtomImage",
    "CZKResiduals",
    "CZOParameters",
    "CZOReport",
    "EXTENSION",
    "KernelHandle",
    "KernelProbes",
    "ProbeSet",
    "PsidoReport",
    "SymbolHandle",
    "TRACE",
    "TraceExperiment",
    "TraceReport",
    "abs_power_symbol",
    "adjoint_moment_residual",
    "atom_image_handle",
    "atom_moment_order",
    "czk_condition_residuals",
    "czo_atom_image_experiment",
    "czo_parameters",
    "ext_coeffs",
    "hilbert_kernel",
    "identity_symbol",
    "kernel_from_config",
    "psido_apply",
    "psido_handle",
    "psido_molecule_experiment",
    "riesz_kernel",
    "sampled_psido",
    "sequence_to_coeffs",
    "sin_abs_symbol",
    "slice_coeffs",
    "symbol_class_residual",
    "symbol_from_config",
    "trace_coeffs",
    "trace_norm_experiment",
    "trace_smoothness_index",
    "weight_compat_certificate",
]
