# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from .reports import report_document, to_jsonable, write_report
from .runner import RUNNERS, RunResult, roundtrip_residual, run, trace_experiment
from .spec import (
    ENSEMBLE_KINDS,
    KINDS,
    ExperimentSpec,
    load_spec,
    parse_spec,
    schema_errors,
    validate,
)

__all__ = [
    "ENSEMBLE_KINDS",
    "ExperimentSpec",
    "KINDS",
    "RUNNERS",
    "RunResult",
    "load_spec",
    "parse_spec",
    "report_document",
    "roundtrip_residual",
    "run",
    "schema_errors",
    "to_jsonable",
    "trace_experiment",
    "validate",
    "write_report",
]
