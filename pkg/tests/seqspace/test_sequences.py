# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
import unittest

import numpy as np

from dms.growth import power_growth, unit_growth
from dms.lattice import DyadicCube, LatticeWindow
from dms.seqspace import (
    CoeffSequence,
    SpaceParams,
    layer,
    make_space_params,
    random_ensemble,
    random_sequence,
    space_params_diagnostics,
)


class TestCoeffSequence(unittest.TestCase):
    def setUp(self):
        self.Q = DyadicCube(0, (0,))
        self.R = DyadicCube(1, (-1,))
        self.t = CoeffSequence({self.Q: [1.0, 2.0], self.R: [0.0, 1j]}, 1, 2)

    def test_shape_is_checked(self):
        with self.assertRaises(ValueError):
            CoeffSequence({self.Q: [1.0, 2.0, 3.0]}, 1, 2)
        with self.assertRaises(ValueError):
            CoeffSequence({DyadicCube(0, (0, 0)): 1.0}, 1)

    def test_scalars_when_m_is_one(self):
        t = CoeffSequence({self.Q: 2.0}, 1)
        np.testing.assert_array_equal(t[self.Q], [2.0 + 0j])

    def test_access(self):
        self.assertEqual(self.t.support, [self.Q, self.R])
        self.assertEqual(self.t.scales(), [0, 1])
        np.testing.assert_array_equal(self.t.get(DyadicCube(4, (0,))), [0, 0])
        self.assertIn(self.R, self.t)
        self.assertEqual(len(self.t), 2)
        self.assertEqual(list(self.t.at_scale(1)), [self.R])
        self.assertEqual(self.t.max_abs(), 2.0)
        self.assertEqual(CoeffSequence.empty(1).max_abs(), 0.0)

    def test_entries_are_read_only(self):
        with self.assertRaises(ValueError):
            self.t[self.Q][0] = 5.0

    def test_arithmetic(self):
        other = CoeffSequence({self.Q: [1.0, 1.0]}, 1, 2)
        total = self.t + other
        np.testing.assert_array_equal(total[self.Q], [2.0, 3.0])
        np.testing.assert_array_equal(total[self.R], [0.0, 1j])
        difference = total - self.t
        np.testing.assert_array_equal(difference[self.Q], [1.0, 1.0])
        np.testing.assert_array_equal(difference[self.R], [0.0, 0.0])
        np.testing.assert_array_equal((2 * self.t)[self.Q], [2.0, 4.0])
        with self.assertRaises(ValueError):
            self.t + CoeffSequence.empty(1, 3)

    def test_json(self):
        records = self.t.to_json()
        self.assertEqual(records[0]["cube"], {"j": 0, "k": [0]})
        self.assertEqual(records[1]["im"], [0.0, 1.0])
        restored = CoeffSequence.from_json(records, 1)
        self.assertEqual(restored.m, 2)
        np.testing.assert_array_equal(restored[self.R], self.t[self.R])
        real_only = CoeffSequence.from_json([{"cube": {"j": 0, "k": [0]}, "re": [3.0]}], 1)
        np.testing.assert_array_equal(real_only[self.Q], [3.0])


class TestLayer(unittest.TestCase):
    def test_evaluate(self):
        t = CoeffSequence({DyadicCube(2, (1,)): 3.0, DyadicCube(1, (0,)): 1.0}, 1)
        f = layer(t, 2)
        values = f.evaluate(np.array([[0.3], [0.6], [-0.1]]))
        np.testing.assert_allclose(values[:, 0], [6.0, 0.0, 0.0])

    def test_empty_scale(self):
        t = CoeffSequence({DyadicCube(0, (0,)): 1.0}, 1)
        self.assertEqual(layer(t, 3).cells, {})


class TestSpaceParams(unittest.TestCase):
    def test_defaults(self):
        params = make_space_params("f", s=0.5, p=1.5, q=math.inf)
        self.assertEqual(params.family, "F")
        self.assertFalse(params.is_b)
        self.assertEqual(params.to_dict()["q"], "inf")
        self.assertEqual(params.growth.label, "unit")

    def test_diagnostics(self):
        params = SpaceParams("C", 0.0, -1.0, 0.0, unit_growth(2), 1, 1)
        messages = space_params_diagnostics(params)
        self.assertEqual(len(messages), 4)

    def test_rejects_invalid(self):
        with self.assertRaises(ValueError):
            make_space_params(p=0.0)
        with self.assertRaises(ValueError):
            make_space_params(p=math.inf)
        with self.assertRaises(ValueError):
            make_space_params(growth=power_growth(0.5, n=2))

    def test_growth_class_is_checked(self):
        growth = power_growth(0.5)
        growth.growth_class = growth.growth_class._replace(omega=1.0)
        with self.assertRaises(ValueError):
            make_space_params(growth=growth)


class TestRandomSequences(unittest.TestCase):
    def test_reproducible(self):
        window = LatticeWindow(0, 2, 1, 1)
        first = random_sequence(window, 5, m=2, random_state=3)
        second = random_sequence(window, 5, m=2, random_state=3)
        self.assertEqual(first.support, second.support)
        for Q in first.support:
            np.testing.assert_array_equal(first[Q], second[Q])
        self.assertEqual(len(first), 5)

    def test_support_in_pool(self):
        cubes = [DyadicCube(0, (0,)), DyadicCube(1, (1,))]
        t = random_sequence(LatticeWindow(), 2, cubes=cubes, random_state=0)
        self.assertEqual(set(t.support), set(cubes))
        with self.assertRaises(ValueError):
            random_sequence(LatticeWindow(), 3, cubes=cubes)

    def test_ensemble(self):
        ensemble = random_ensemble(LatticeWindow(0, 1, 1, 0), 4, 2, random_state=1)
        self.assertEqual(len(ensemble), 4)
        self.assertTrue(all(len(t) == 2 for t in ensemble))
