# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .experiments import (
    BoundednessReport,
    EnsembleSpec,
    EnvelopeFactory,
    IdentityFactory,
    ProbeReport,
    empirical_boundedness,
    refinement_probe,
)
from .matrices import (
    AdEnvelope,
    ApplyResult,
    Certificate,
    EnvelopeOperator,
    OperatorMatrix,
    apply,
    certify,
    compose,
    envelope_matrix,
    identity_matrix,
    udef_block,
    udef_entries,
    udef_entry,
)
from .thresholds import JIndex, Thresholds, j_index, thresholds

__all__ = [
    "AdEnvelope",
    "ApplyResult",
    "BoundednessReport",
    "Certificate",
    "EnsembleSpec",
    "EnvelopeFactory",
    "EnvelopeOperator",
    "IdentityFactory",
    "JIndex",
    "OperatorMatrix",
    "ProbeReport",
    "Thresholds",
    "apply",
    "certify",
    "compose",
    "empirical_boundedness",
    "envelope_matrix",
    "identity_matrix",
    "j_index",
    "refinement_probe",
    "thresholds",
    "udef_block",
    "udef_entries",
    "udef_entry",
]
