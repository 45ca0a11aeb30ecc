# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .atoms import make_atom
from .brackets import Brackets, bracket_fns
from .checks import (
    ANALYSIS,
    SYNTHESIS,
    AtomReport,
    ConditionResult,
    MoleculeBounds,
    MoleculeGrid,
    MoleculeParams,
    MoleculeReport,
    atom_check,
    family_thresholds,
    molecule_check,
)
from .decomposition import (
    AtomDecomposition,
    decomposition_weight,
    molecule_gram_matrix,
    psi_atom_decomposition,
)
from .handles import SmoothFunctionHandle, envelope, envelope_handle

__all__ = [
    "ANALYSIS",
    "AtomDecomposition",
    "AtomReport",
    "Brackets",
    "ConditionResult",
    "MoleculeBounds",
    "MoleculeGrid",
    "MoleculeParams",
    "MoleculeReport",
    "SYNTHESIS",
    "SmoothFunctionHandle",
    "atom_check",
    "bracket_fns",
    "decomposition_weight",
    "envelope",
    "envelope_handle",
    "family_thresholds",
    "make_atom",
    "molecule_check",
    "molecule_gram_matrix",
    "psi_atom_decomposition",
]
