# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, List, Union

import numpy as np

from ..version import __version
from .runner import RunResult
from .spec import ExperimentSpec

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"


def to_jsonable(value: Any) -> Any:
    """
    Plain JSON values for reports: numpy scalars and arrays become Python numbers and
    lists, tuples become lists and non-finite floats become the strings ``"nan"``,
    ``"inf"`` and ``"-inf"``.

    >>> to_jsonable({"a": (1, float("inf")), "b": np.float64(0.5)})
    {'a': [1, 'inf'], 'b': 0.5}
    """
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    return value


def report_document(result: RunResult, spec: ExperimentSpec) -> dict:
    return to_jsonable(
        {
            "version": __version(),
            "kind": result.kind,
            "seed": spec.seed,
            "spec": spec.config,
            "results": result.results,
            "warnings": result.warnings,
            "status": "warnings" if result.warnings else "ok",
        }
    )


def _csv_cell(value: Any) -> Any:
    value = to_jsonable(value)
    return json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else value


def write_report(
    result: RunResult, spec: ExperimentSpec, out_dir: Union[str, Path]
) -> List[Path]:
    """
    Writes ``report.json``, one ``<name>.csv`` per table and the ``plot_*.csv`` curve
    data into ``out_dir``, creating it when needed.

    The JSON is written with sorted keys and a fixed layout, so a fixed spec and seed
    give byte-identical files.

    Returns
    -------
    List[Path]
        The files written, report first.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / REPORT_FILE
    with open(report_path, "w", encoding="utf-8", newline="\n") as report_io:
        json.dump(
            report_document(result, spec),
            report_io,
            sort_keys=True,
            indent=2,
            allow_nan=False,
            ensure_ascii=False,
        )
        report_io.write("\n")
    paths = [report_path]
    for name in sorted(result.tables):
        header, rows = result.tables[name]
        path = out / f"{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as table_io:
            writer = csv.writer(table_io, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_csv_cell(cell) for cell in row])
        paths.append(path)
    logger.info(f"Wrote {len(paths)} files to {out}")
    return paths
