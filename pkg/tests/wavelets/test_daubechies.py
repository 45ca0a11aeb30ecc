# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
import unittest

import numpy as np

from dms.wavelets import (
    cascade_samples,
    daubechies_filter,
    find_k0,
    orthonormality_residual,
    two_scale_residual,
)


class TestDaubechiesFilter(unittest.TestCase):
    def test_haar(self):
        filters = daubechies_filter(1)
        np.testing.assert_allclose(filters.h, [1 / math.sqrt(2)] * 2)
        np.testing.assert_allclose(filters.g, [1 / math.sqrt(2), -1 / math.sqrt(2)])
        np.testing.assert_allclose(filters.d, [1.0, -1.0])
        self.assertEqual(filters.k, 1)

    def test_filter_identities(self):
        for k in range(1, 7):
            filters = daubechies_filter(k)
            self.assertEqual(len(filters.h), 2 * k)
            self.assertAlmostEqual(filters.h.sum(), math.sqrt(2))
            self.assertAlmostEqual(filters.c.sum(), 2.0)
            self.assertLessEqual(orthonormality_residual(filters.h), 1e-12)
            positions = np.arange(2 * k, dtype=float)
            for degree in range(k):
                self.assertAlmostEqual(
                    float(filters.g @ positions ** degree),
                    0.0,
                    delta=1e-9 * (2 * k) ** degree,
                )

    def test_rejects_orders(self):
        for k in (0, 11, 2.5):
            with self.assertRaises(ValueError):
                daubechies_filter(k)


class TestCascade(unittest.TestCase):
    def test_haar_is_exact(self):
        samples = cascade_samples(daubechies_filter(1), levels=5)
        np.testing.assert_array_equal(samples.phi[5], [1.0] * 32 + [0.0])
        np.testing.assert_array_equal(samples.psi[5], [1.0] * 16 + [-1.0] * 16 + [0.0])
        self.assertEqual(two_scale_residual(daubechies_filter(1), samples, 5), 0.0)
        np.testing.assert_allclose(samples.grid(2), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_discrete_orthonormality(self):
        samples = cascade_samples(daubechies_filter(2), levels=8)
        step = 2.0 ** -8
        self.assertAlmostEqual(step * float(samples.phi[8] @ samples.phi[8]), 1.0, places=10)
        self.assertAlmostEqual(step * float(samples.psi[8] @ samples.psi[8]), 1.0, places=10)
        self.assertAlmostEqual(step * float(samples.phi[8] @ samples.psi[8]), 0.0, places=10)

    def test_two_scale_residual(self):
        filters = daubechies_filter(2)
        samples = cascade_samples(filters, levels=10)
        fine = two_scale_residual(filters, samples, 10)
        self.assertLess(fine, 0.1)
        self.assertLess(fine, two_scale_residual(filters, samples, 4))
        self.assertLess(two_scale_residual(filters, samples, 10, midpoints=True), 0.25)
        with self.assertRaises(ValueError):
            two_scale_residual(filters, samples, 11)

    def test_level_range(self):
        for levels in (3, 15):
            with self.assertRaises(ValueError):
                cascade_samples(daubechies_filter(2), levels)


class TestK0(unittest.TestCase):
    def test_haar(self):
        k0 = find_k0(cascade_samples(daubechies_filter(1), levels=4))
        self.assertEqual(k0.k0, 0)
        self.assertEqual(k0.value, 1.0)

    def test_d4(self):
        k0 = find_k0(cascade_samples(daubechies_filter(2), levels=10))
        self.assertEqual(k0.k0, -1)
        self.assertAlmostEqual(k0.value, (1 + math.sqrt(3)) / 2, places=2)
