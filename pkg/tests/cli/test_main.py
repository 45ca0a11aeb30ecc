# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import contextlib
import io
import json
import os
import tempfile
import unittest

from dms.__main__ import EXIT_ERROR, EXIT_OK, EXIT_WARNINGS, main
from tests.utils import data_file


def _write(directory, name, document):
    path = os.path.join(directory, name)
    with open(path, "w") as spec_io:
        json.dump(document, spec_io)
    return path


class TestMain(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def _quiet(self, argv):
        with contextlib.redirect_stderr(io.StringIO()), contextlib.redirect_stdout(
            io.StringIO()
        ) as out:
            code = main(argv)
        return code, out.getvalue()

    def test_norm(self):
        out = os.path.join(self.tmp, "norm")
        code, _ = self._quiet(
            ["norm", "--spec", data_file("spec_norm_baseline.json"), "--out", out]
        )
        self.assertEqual(code, EXIT_OK)
        with open(os.path.join(out, "report.json")) as report_io:
            report = json.load(report_io)
        self.assertAlmostEqual(report["results"]["norm"], 1.0)
        self.assertEqual(report["warnings"], [])
        self.assertTrue(os.path.exists(os.path.join(out, "plot_norm_by_scale.csv")))

    def test_window_override(self):
        out = os.path.join(self.tmp, "norm")
        spec = data_file("spec_norm_baseline.json")
        code, _ = self._quiet(["norm", "--spec", spec, "--window", "0:1:0", "--out", out])
        self.assertEqual(code, EXIT_OK)
        with open(os.path.join(out, "report.json")) as report_io:
            report = json.load(report_io)
        self.assertEqual(report["spec"]["window"]["box"], 0)

    def test_kind_mismatch(self):
        spec = data_file("spec_norm_baseline.json")
        code, _ = self._quiet(["adtest", "--spec", spec, "--out", self.tmp])
        self.assertEqual(code, EXIT_ERROR)

    def test_missing_spec(self):
        missing = os.path.join(self.tmp, "missing.json")
        code, _ = self._quiet(["norm", "--spec", missing, "--out", self.tmp])
        self.assertEqual(code, EXIT_ERROR)
        code, _ = self._quiet(["validate", "--spec", missing])
        self.assertEqual(code, EXIT_ERROR)

    def test_runtime_error_in_spec_values(self):
        path = _write(
            self.tmp,
            "bad.json",
            {
                "kind": "norm",
                "window": "0:1:0",
                "space": {"p": -1.0},
                "sequence": {"entries": []},
            },
        )
        code, _ = self._quiet(["norm", "--spec", path, "--out", self.tmp])
        self.assertEqual(code, EXIT_ERROR)

    def test_warnings_exit_code(self):
        document = {
            "kind": "adtest",
            "seed": 1,
            "window": "0:1:0",
            "space": {"family": "B", "s": 0.0, "p": 2.0, "q": 2.0},
            "operator": {"kind": "envelope", "D": 0.5, "E": 0.5, "F": 0.5},
            "ensemble": {"size": 3, "support_size": 2},
        }
        path = _write(self.tmp, "adtest.json", document)
        out = os.path.join(self.tmp, "adtest")
        code, _ = self._quiet(["adtest", "--spec", path, "--out", out])
        self.assertEqual(code, EXIT_WARNINGS)
        with open(os.path.join(out, "report.json")) as report_io:
            self.assertEqual(json.load(report_io)["status"], "warnings")

    def test_validate(self):
        code, printed = self._quiet(["validate", "--spec", data_file("spec_norm_baseline.json")])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(printed, "")
        document = {
            "kind": "norm",
            "window": "0:1:0",
            "space": {"growth": {"kind": "unit", "class": [0.0, 0.5, 1.0]}},
            "sequence": {"entries": []},
        }
        path = _write(self.tmp, "growth.json", document)
        code, printed = self._quiet(["validate", "--spec", path])
        self.assertEqual(code, EXIT_WARNINGS)
        self.assertIn("omega <= n(delta2 - delta1)", printed)

    def test_usage(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                main(["norm", "--spec", data_file("spec_norm_baseline.json")])
            with self.assertRaises(SystemExit):
                main([])
