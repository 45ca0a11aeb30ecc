# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from dms.lattice import (
    DyadicCube,
    LatticeWindow,
    contains,
    lift,
    middle_band,
    project,
    shadow_cube,
    shadow_ratio,
)


class TestLiftProject(unittest.TestCase):
    def test_lift(self):
        self.assertEqual(lift(DyadicCube(2, (3,)), -1), DyadicCube(2, (3, -1)))

    def test_project_rejects_one_dimension(self):
        with self.assertRaises(ValueError):
            project(DyadicCube(0, (1,)))

    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(-4, 6),
        st.lists(st.integers(-32, 32), min_size=1, max_size=3),
        st.integers(-20, 20),
    )
    def test_project_inverts_lift(self, j, k, i):
        Q = DyadicCube(j, tuple(k))
        P = lift(Q, i)
        self.assertEqual(P.n, Q.n + 1)
        self.assertEqual(project(P), Q)
        self.assertEqual(P.side, Q.side)


class TestShadowCube(unittest.TestCase):
    def test_same_side_at_zero_shift(self):
        R = DyadicCube(0, (0,))
        shadow = shadow_cube(R, 0)
        self.assertEqual(shadow.cube, DyadicCube(0, (0, 0)))
        self.assertEqual(shadow.ratio, 1)

    def test_double_side_at_unit_shift(self):
        R = DyadicCube(0, (0,))
        shadow = shadow_cube(R, 1)
        self.assertEqual(shadow.ratio, 2)
        self.assertEqual(shadow.cube, DyadicCube(-1, (0, 0)))

    def test_ratio_grows_with_the_shift(self):
        R = DyadicCube(1, (3,))
        ratios = [shadow_ratio(R, i) for i in (0, 1, 2, 3, -1, -2, -3)]
        self.assertEqual(ratios, [1, 2, 4, 4, 1, 2, 4])

    @settings(max_examples=80, deadline=None)
    @given(st.integers(-2, 4), st.integers(-16, 16), st.integers(-40, 40))
    def test_covers_every_lifted_subcube(self, j, k, i):
        R = DyadicCube(j, (k,))
        shadow = shadow_cube(R, i)
        bound = 2 ** (math.ceil(math.log2(abs(i) + 2)) + 1)
        self.assertLessEqual(shadow.ratio, bound)
        self.assertTrue(contains(shadow.cube, lift(R, i)))
        for S in R.descendants(j + 2):
            self.assertTrue(contains(shadow.cube, lift(S, i)))

    def test_window_exit(self):
        window = LatticeWindow(0, 2, 2, 0)
        with self.assertRaises(ValueError):
            shadow_cube(DyadicCube(0, (0,)), 7, window)


class TestMiddleBand(unittest.TestCase):
    def test_third_of_volume(self):
        Q = DyadicCube(1, (1,))
        band = middle_band(Q, 2)
        self.assertAlmostEqual(band.volume, lift(Q, 2).volume / 3)
        self.assertAlmostEqual(band.lower[1], 0.5 * (2 + 1 / 3))
        self.assertAlmostEqual(band.upper[1], 0.5 * (2 + 2 / 3))
        self.assertEqual(band.lower[0], 0.5)
