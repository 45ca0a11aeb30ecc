# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import json
import os
import tempfile
import unittest

import numpy as np

from dms.cli import (
    KINDS,
    RUNNERS,
    load_spec,
    parse_spec,
    report_document,
    roundtrip_residual,
    run,
    to_jsonable,
    trace_experiment,
    write_report,
)
from tests.utils import data_file


def _document(name):
    with open(data_file(name)) as spec_io:
        return json.load(spec_io)


class TestRunners(unittest.TestCase):
    def test_every_kind_has_a_runner(self):
        self.assertEqual(sorted(RUNNERS), sorted(KINDS))

    def test_norm_baseline(self):
        result = run(load_spec(data_file("spec_norm_baseline.json")))
        self.assertAlmostEqual(result.results["norm"], 1.0)
        self.assertFalse(result.results["weighted"])
        self.assertEqual(result.warnings, [])
        header, rows = result.tables["norm_by_cube"]
        self.assertEqual(tuple(header), ("cube", "value"))
        self.assertIn("0:0", [row[0] for row in rows])

    def test_weighted_norm(self):
        document = _document("spec_norm_baseline.json")
        document["weight"] = {"kind": "constant", "matrix": [[4.0]]}
        result = run(parse_spec(document))
        self.assertTrue(result.results["weighted"])
        self.assertAlmostEqual(result.results["norm"], 2.0)

    def test_adtest_identity(self):
        result = run(load_spec(data_file("spec_adtest_identity.json")))
        self.assertAlmostEqual(result.results["max_ratio"], 1.0)
        self.assertAlmostEqual(result.results["refined_max_ratio"], 1.0)
        self.assertAlmostEqual(result.results["drift"], 0.0)
        header, rows = result.tables["ratios"]
        self.assertEqual(len(rows), 5)
        self.assertEqual(result.warnings, [])

    def test_adtest_envelope_warnings(self):
        document = _document("spec_adtest_identity.json")
        document["window"] = "0:1:0"
        document["ensemble"] = {"size": 3, "support_size": 2}
        document["operator"] = {"kind": "envelope", "D": 0.5, "E": 0.5, "F": 0.5}
        result = run(parse_spec(document))
        self.assertTrue(
            any("is not above the thresholds" in message for message in result.warnings)
        )

    def test_unknown_operator(self):
        document = _document("spec_adtest_identity.json")
        document["operator"] = {"kind": "shift"}
        with self.assertRaises(ValueError):
            run(parse_spec(document))

    def test_trace_identity(self):
        spec = load_spec(data_file("spec_trace_identity.json"))
        result = run(spec)
        self.assertAlmostEqual(result.results["certificate"], 1.0)
        self.assertLessEqual(result.results["roundtrip_residual"], 1e-6)
        self.assertEqual(result.results["target"]["n"], 1)
        self.assertEqual(result.results["k0"], {"k0": 0, "value": 1.0})
        self.assertEqual(len(result.tables["ratios"][1]), 4)

    def test_roundtrip(self):
        experiment = trace_experiment(load_spec(data_file("spec_trace_identity.json")))
        self.assertLessEqual(roundtrip_residual(experiment, seed=5, count=4), 1e-6)

    def test_wavelet_check(self):
        spec = parse_spec(
            {"kind": "wavelet-check", "window": "0:1:0", "wavelet": {"k": 2, "levels": 10}}
        )
        result = run(spec)
        checks = result.results["checks"]
        self.assertLess(checks["orthonormality"], 1e-10)
        self.assertLess(checks["gram"], 1e-6)
        self.assertEqual(result.results["k0"]["k0"], -1)
        self.assertEqual(result.warnings, [])


class TestReports(unittest.TestCase):
    def test_to_jsonable(self):
        value = to_jsonable(
            {
                "array": np.array([1.0, np.nan]),
                "complex": 1 + 2j,
                "flag": np.bool_(True),
                "count": np.int64(3),
                "tail": -np.inf,
            }
        )
        self.assertEqual(value["array"], [1.0, "nan"])
        self.assertEqual(value["complex"], {"re": 1.0, "im": 2.0})
        self.assertIs(value["flag"], True)
        self.assertEqual(value["count"], 3)
        self.assertEqual(value["tail"], "-inf")

    def test_report_is_reproducible(self):
        spec = load_spec(data_file("spec_norm_baseline.json"))
        with tempfile.TemporaryDirectory() as tmp:
            first = write_report(run(spec), spec, os.path.join(tmp, "a"))
            second = write_report(run(spec), spec, os.path.join(tmp, "b"))
            self.assertEqual(
                [path.name for path in first],
                ["report.json", "norm_by_cube.csv", "plot_norm_by_scale.csv"],
            )
            for left, right in zip(first, second):
                self.assertEqual(left.read_bytes(), right.read_bytes())
            document = json.loads(first[0].read_text())
            self.assertEqual(document["status"], "ok")
            self.assertEqual(document["kind"], "norm")
            self.assertEqual(document["spec"]["window"]["j_max"], 2)

    def test_status(self):
        spec = load_spec(data_file("spec_norm_baseline.json"))
        result = run(spec)._replace(warnings=["something"])
        self.assertEqual(report_document(result, spec)["status"], "warnings")
