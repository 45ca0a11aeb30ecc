# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
import tempfile
import unittest

import numpy as np

from dms.lattice import DyadicCube, LatticeWindow
from dms.seqspace import make_space_params
from dms.wavelets import (
    SampledFunction,
    WaveletCoeffs,
    WaveletSystem,
    analyze,
    check_resolution,
    coeffs_norm,
    gram_residual,
    minimal_wavelet_order,
    moment_residual,
    scaling_integral,
    synthesize,
    wavelet_types,
)


class TestWaveletSystem(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.haar = WaveletSystem(1, levels=10)
        cls.d4 = WaveletSystem(2, levels=10)
        cls.d6 = WaveletSystem(3, levels=10)

    def test_types(self):
        self.assertEqual(wavelet_types(1), [(1,)])
        self.assertEqual(wavelet_types(2), [(0, 1), (1, 0), (1, 1)])
        self.assertEqual(self.haar.with_dimension(2).types, wavelet_types(2))
        self.assertEqual(self.haar.n, 1)

    def test_haar_evaluation(self):
        Q = DyadicCube(1, (0,))
        values = self.haar.evaluate((1,), Q, np.array([[0.1], [0.3], [0.7]]))
        np.testing.assert_allclose(values, [math.sqrt(2), -math.sqrt(2), 0.0])
        self.assertEqual(self.haar.k0.k0, 0)
        self.assertEqual(self.haar.support_radius, 1)

    def test_integrals_and_moments(self):
        self.assertEqual(scaling_integral(self.haar), 1.0)
        self.assertAlmostEqual(scaling_integral(self.d4), 1.0, places=10)
        self.assertEqual(moment_residual(self.haar), 0.0)
        self.assertLess(moment_residual(self.d4), 1e-8)
        self.assertLess(moment_residual(self.d4.with_dimension(2)), 1e-8)

    def test_gram(self):
        window = LatticeWindow(0, 1, 1, 0)
        self.assertLess(gram_residual(self.haar, window), 1e-12)
        self.assertLess(gram_residual(self.d4, window), 1e-8)
        self.assertLess(gram_residual(self.haar.with_dimension(2), window.with_dimension(2)), 1e-12)

    def test_order_three(self):
        self.assertEqual(self.d6.k, 3)
        self.assertLess(gram_residual(self.d6, LatticeWindow(0, 1, 1, 1)), 1e-6)
        self.assertLess(moment_residual(self.d6), 1e-6)
        self.assertAlmostEqual(scaling_integral(self.d6), 1.0, places=8)

    def test_depth_range(self):
        with self.assertRaises(ValueError):
            self.haar.factor_samples(1, 0)
        with self.assertRaises(ValueError):
            self.haar.factor_samples(0, 11)

    def test_cached_tables(self):
        with tempfile.TemporaryDirectory() as cache_dir:
            first = WaveletSystem(3, levels=6, cache_dir=cache_dir)
            second = WaveletSystem(3, levels=6, cache_dir=cache_dir)
            np.testing.assert_array_equal(first.filters.h, second.filters.h)
            np.testing.assert_array_equal(first.samples.phi[6], second.samples.phi[6])


class TestResolution(unittest.TestCase):
    def test_bounds(self):
        system = WaveletSystem(1, levels=6)
        window = LatticeWindow(0, 2, 1, 0)
        check_resolution(system, window, 4)
        with self.assertRaises(ValueError):
            check_resolution(system, window, 3)
        with self.assertRaises(ValueError):
            check_resolution(system, window, 7)

    def test_minimal_order(self):
        self.assertEqual(minimal_wavelet_order(3.2, 0.1, 1), 3)
        self.assertEqual(minimal_wavelet_order(2.5, 2.5, 1), 3)
        self.assertEqual(minimal_wavelet_order(0.0, -2.0, 2), 1)


class TestAnalyzeSynthesize(unittest.TestCase):
    def _round_trip(self, system, window, resolution):
        lam = system.types[-1]
        original = WaveletCoeffs(
            {
                (lam, DyadicCube(window.j_min, (0,) * window.n)): 1.0,
                (lam, DyadicCube(window.j_max, (-1,) * window.n)): 2.0 - 1.0j,
            },
            window.n,
        )
        f = synthesize(original, system, resolution)
        recovered = analyze(f, system, window, types=[lam], drop_below=1e-9)
        self.assertEqual(len(recovered), 2)
        for key, value in original.items():
            np.testing.assert_allclose(recovered.get(*key), value, atol=1e-8)

    def test_haar(self):
        self._round_trip(WaveletSystem(1, levels=8), LatticeWindow(0, 1, 1, 0), 3)

    def test_d4(self):
        self._round_trip(WaveletSystem(2, levels=10), LatticeWindow(0, 1, 1, 1), 6)

    def test_haar_two_dimensions(self):
        system = WaveletSystem(1, levels=8, n=2)
        self._round_trip(system, LatticeWindow(0, 1, 2, 0), 3)

    def test_analyze_sampled_callable(self):
        system = WaveletSystem(1, levels=8)
        window = LatticeWindow(0, 0, 1, 0)
        f = SampledFunction.from_callable(
            lambda x: np.where(x[:, 0] < 0.5, 1.0, 0.0), [-1.0], [1.0], 4
        )
        self.assertEqual(f.values.shape, (32, 1))
        coeffs = analyze(f, system, window)
        np.testing.assert_allclose(coeffs.get((1,), DyadicCube(0, (0,))), [0.5])
        np.testing.assert_allclose(coeffs.get((1,), DyadicCube(0, (-1,))), [0.0])

    def test_dimension_mismatch(self):
        system = WaveletSystem(1, levels=8)
        f = SampledFunction(4, (0, 0), np.zeros((4, 4, 1)))
        with self.assertRaises(ValueError):
            analyze(f, system, LatticeWindow(0, 1, 1, 0))

    def test_synthesize_empty(self):
        f = synthesize(WaveletCoeffs({}, 1), WaveletSystem(1, levels=6), 4)
        self.assertEqual(f.values.shape, (1, 1))


class TestWaveletCoeffs(unittest.TestCase):
    def setUp(self):
        self.Q = DyadicCube(0, (0,))
        self.c = WaveletCoeffs({((1,), self.Q): 2.0, ((0,), self.Q): 1.0}, 1, k=2)

    def test_components(self):
        self.assertEqual(self.c.types(), [(0,), (1,)])
        component = self.c.component((1,))
        np.testing.assert_array_equal(component[self.Q], [2.0])
        np.testing.assert_array_equal(self.c.get((1,), DyadicCube(1, (0,))), [0.0])

    def test_arithmetic(self):
        difference = self.c - 0.5 * self.c
        np.testing.assert_array_equal(difference.get((1,), self.Q), [1.0])
        self.assertEqual(self.c.max_abs(), 2.0)

    def test_json(self):
        records = self.c.to_json()
        self.assertEqual(records[0]["lambda"], [0])
        restored = WaveletCoeffs.from_json(records, 1, k=2)
        np.testing.assert_array_equal(restored.get((1,), self.Q), [2.0])

    def test_shape_errors(self):
        with self.assertRaises(ValueError):
            WaveletCoeffs({((1, 0), self.Q): 1.0}, 1)
        with self.assertRaises(ValueError):
            WaveletCoeffs({((1,), self.Q): [1.0, 2.0]}, 1)

    def test_norm(self):
        params = make_space_params("B", p=2.0, q=2.0)
        self.assertAlmostEqual(coeffs_norm(self.c, params), 3.0)
