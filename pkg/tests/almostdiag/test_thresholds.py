# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
import unittest

from dms.almostdiag import j_index, thresholds
from dms.growth import power_growth
from dms.seqspace import make_space_params


class TestJIndex(unittest.TestCase):
    def test_cases(self):
        self.assertEqual(j_index("B", 2.0, 2.0, 0.9, 0.9), (1.0, "supercritical"))
        self.assertEqual(j_index("B", 2.0, 2.0, 0.5, 0.5, n=2), (2.0, "subcritical"))
        self.assertEqual(j_index("F", 2.0, 0.5, 0.5, 0.5), (2.0, "critical"))
        self.assertEqual(j_index("F", 2.0, math.inf, 0.5, 0.5), (1.0, "supercritical"))
        self.assertEqual(j_index("F", 2.0, 0.5, 0.0, 0.0), (2.0, "subcritical"))
        self.assertEqual(j_index("b", 0.5, 4.0, 0.0, 0.0), (2.0, "subcritical"))

    def test_invalid(self):
        with self.assertRaises(ValueError):
            j_index("C", 2.0, 2.0, 0.0, 0.0)
        with self.assertRaises(ValueError):
            j_index("B", 0.0, 2.0, 0.0, 0.0)


class TestThresholds(unittest.TestCase):
    def test_unweighted_baseline(self):
        result = thresholds(make_space_params("B", p=2.0, q=2.0), 0.0, 0.0)
        self.assertEqual(result.case, "subcritical")
        self.assertAlmostEqual(result.D_star, 1.0)
        self.assertAlmostEqual(result.E_star, 0.5)
        self.assertAlmostEqual(result.F_star, 0.5)
        self.assertEqual(result.Delta, 0.0)

    def test_weight_dimensions(self):
        result = thresholds(make_space_params("B", p=2.0, q=2.0), 0.5, 1.0)
        self.assertAlmostEqual(result.D_star, 1.5)
        self.assertAlmostEqual(result.E_star, 0.5)
        self.assertAlmostEqual(result.F_star, 1.0)

    def test_growth_shifts_thresholds(self):
        params = make_space_params("B", s=0.25, p=2.0, q=2.0, growth=power_growth(0.8))
        result = thresholds(params, 0.0, 0.0)
        self.assertEqual(result.case, "supercritical")
        self.assertAlmostEqual(result.Delta, 0.3)
        self.assertAlmostEqual(result.D_star, 1.0)
        self.assertAlmostEqual(result.E_star, 1.05)
        self.assertAlmostEqual(result.F_star, -0.05)

    def test_margin(self):
        result = thresholds(make_space_params("B", p=2.0, q=2.0), 0.0, 0.0)
        self.assertAlmostEqual(result.margin(2.0, 0.75, 0.6), 0.1)
        self.assertLess(result.margin(0.5, 3.0, 3.0), 0)

    def test_dimension_ranges(self):
        params = make_space_params("B", p=2.0, q=2.0)
        with self.assertRaises(ValueError):
            thresholds(params, 1.0, 0.0)
        with self.assertRaises(ValueError):
            thresholds(params, 0.0, -0.5)
