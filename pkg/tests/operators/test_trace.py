# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import unittest

import numpy as np

from dms.almostdiag import EnsembleSpec
from dms.lattice import DyadicCube, LatticeWindow, lift
from dms.matweight import diag_power_weight, identity_weight
from dms.operators import (
    EXTENSION,
    TRACE,
    TraceExperiment,
    ext_coeffs,
    sequence_to_coeffs,
    slice_coeffs,
    trace_coeffs,
    trace_norm_experiment,
    trace_smoothness_index,
    weight_compat_certificate,
)
from dms.seqspace import CoeffSequence, make_space_params
from dms.wavelets import WaveletCoeffs, WaveletSystem


def _coeffs(entries, n=1, k=1):
    return WaveletCoeffs(entries, n, 1, k)


class TestExtension(unittest.TestCase):
    def test_entries(self):
        Q = DyadicCube(1, (3,))
        extended = ext_coeffs(_coeffs({((1,), Q): 2.0}), 0, 1.0)
        self.assertEqual(extended.n, 2)
        self.assertEqual(len(extended), 1)
        np.testing.assert_allclose(extended.get((1, 0), lift(Q, 0)), [2.0 * np.sqrt(0.5)])

    def test_shift_and_value(self):
        Q = DyadicCube(0, (0,))
        extended = ext_coeffs(_coeffs({((1,), Q): 1.0}), -1, 2.0)
        np.testing.assert_allclose(extended.get((1, 0), DyadicCube(0, (0, -1))), [0.5])

    def test_small_value(self):
        with self.assertRaises(ValueError):
            ext_coeffs(_coeffs({}), 0, 1e-9)


class TestTrace(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.haar = WaveletSystem(1, levels=6, n=2)
        cls.d4 = WaveletSystem(2, levels=6, n=2)
        cls.window = LatticeWindow(0, 1, 1, 0)
        cls.c = _coeffs(
            {
                ((1,), DyadicCube(0, (-1,))): 1.5,
                ((1,), DyadicCube(1, (1,))): -0.5 + 0.25j,
            }
        )

    def test_slice_inverts_extension(self):
        for system in (self.haar, self.d4):
            c = _coeffs(dict(self.c.items()), k=system.k)
            extended = ext_coeffs(c, system.k0.k0, system.k0.value)
            sliced = slice_coeffs(extended, system)
            self.assertEqual(len(sliced), len(c))
            for (lam, Q), value in c.items():
                np.testing.assert_allclose(sliced.get(lam, Q), value, atol=1e-12)

    def test_trace_after_extension_is_identity(self):
        extended = ext_coeffs(self.c, self.haar.k0.k0, self.haar.k0.value)
        traced = trace_coeffs(extended, self.haar, self.window)
        difference = traced - self.c
        self.assertLessEqual(difference.max_abs(), 1e-6)

    def test_trace_after_extension_random_inputs(self):
        rng = np.random.RandomState(0)
        cubes = self.window.all_cubes()
        k0, value = self.d4.k0.k0, self.d4.k0.value
        worst = 0.0
        for _ in range(100):
            chosen = rng.choice(len(cubes), size=3, replace=False)
            values = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            c = _coeffs(
                {((1,), cubes[i]): v for i, v in zip(chosen, values)}, k=self.d4.k
            )
            traced = trace_coeffs(ext_coeffs(c, k0, value), self.d4, self.window)
            worst = max(worst, (traced - c).max_abs())
        self.assertLessEqual(worst, 1e-6)

    def test_far_slices_vanish(self):
        Q = DyadicCube(0, (0,))
        far = _coeffs({((1, 0), lift(Q, 3)): 1.0, ((1, 1), lift(Q, -1)): 1.0}, n=2)
        self.assertEqual(len(slice_coeffs(far, self.haar)), 0)
        self.assertEqual(len(trace_coeffs(far, self.haar, self.window)), 0)

    def test_dimensions(self):
        with self.assertRaises(ValueError):
            slice_coeffs(self.c, self.haar)
        with self.assertRaises(ValueError):
            trace_coeffs(self.c, self.haar, self.window)
        extended = ext_coeffs(self.c, 0, 1.0)
        with self.assertRaises(ValueError):
            trace_coeffs(extended, self.haar, self.window, resolution=2)


class TestWeightCompatibility(unittest.TestCase):
    def setUp(self):
        self.window = LatticeWindow(0, 2, 1, 0)

    def test_identity_weights(self):
        V, W = identity_weight(1, 2), identity_weight(2, 2)
        for direction in (TRACE, EXTENSION):
            certificate = weight_compat_certificate(V, W, 2.0, 1.0, self.window, direction)
            self.assertAlmostEqual(certificate, 1.0)

    def test_shift_exponent(self):
        V, W = identity_weight(1), identity_weight(2)
        # the trace side grows like 2^{j(1 - gamma)} over the window scales
        certificate = weight_compat_certificate(V, W, 2.0, 0.0, self.window, TRACE)
        self.assertAlmostEqual(certificate, 4.0)

    def test_validation(self):
        V, W = identity_weight(1), identity_weight(2)
        with self.assertRaises(ValueError):
            weight_compat_certificate(V, W, 2.0, 1.0, self.window, "both")
        with self.assertRaises(ValueError):
            weight_compat_certificate(V, identity_weight(1), 2.0, 1.0, self.window)
        with self.assertRaises(ValueError):
            weight_compat_certificate(V, identity_weight(2, 2), 2.0, 1.0, self.window)


class TestSmoothnessIndex(unittest.TestCase):
    def test_regimes(self):
        self.assertEqual(trace_smoothness_index("B", 1, 0.5, 1.0, 0.0), 1.0)
        self.assertEqual(trace_smoothness_index("f", 2, 2.0, 2.0, 1.0), -1.0)
        self.assertEqual(trace_smoothness_index("F", 2, 2.0, 2.0, 0.0), 0.0)
        self.assertEqual(trace_smoothness_index("B", 1, 1.0, np.inf, 1.0), 0.0)
        with self.assertRaises(ValueError):
            trace_smoothness_index("A", 1, 1.0, 1.0, 0.0)


class TestTraceExperiment(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.system = WaveletSystem(1, levels=6)
        cls.window = LatticeWindow(0, 1, 1, 0)
        cls.experiment = TraceExperiment(
            source=make_space_params("B", s=2.0, p=2.0, q=2.0, n=2),
            W=identity_weight(2),
            V=identity_weight(1),
            gamma=1.0,
            system=cls.system,
            window=cls.window,
        )

    def test_target(self):
        target = self.experiment.target()
        self.assertEqual((target.family, target.s, target.q, target.n), ("B", 1.5, 2.0, 1))
        f_source = make_space_params("F", s=2.0, p=2.0, q=1.0, n=2)
        self.assertEqual(self.experiment._replace(source=f_source).target().q, 2.0)
        self.assertEqual(self.experiment.source_window(), LatticeWindow(0, 1, 2, 0))
        self.assertEqual(self.experiment.band, 1)

    def test_diagnostics(self):
        self.assertEqual(self.experiment.diagnostics(), [])
        low = self.experiment._replace(source=make_space_params("B", s=0.0, n=2))
        messages = low.diagnostics()
        self.assertEqual(len(messages), 1)
        self.assertIn("is not above 0.5", messages[0])

    def test_extension_ratios(self):
        report = trace_norm_experiment(
            self.experiment, EnsembleSpec(size=4, support_size=3, seed=1), EXTENSION
        )
        self.assertAlmostEqual(report.certificate, 1.0)
        np.testing.assert_allclose(report.ratios, 1.0)
        np.testing.assert_allclose(report.refined_ratios, 1.0)
        self.assertAlmostEqual(report.drift, 0.0)
        self.assertEqual(report.skipped, 0)
        self.assertEqual(report.warnings, [])
        self.assertEqual(report.to_dict()["direction"], "ext")

    def test_explicit_members(self):
        t = CoeffSequence({DyadicCube(1, (0,)): 1.0, DyadicCube(0, (-1,)): 2.0}, n=1)
        members = [sequence_to_coeffs(t, (1,), k=1), WaveletCoeffs({}, 1, 1, 1)]
        report = trace_norm_experiment(self.experiment, direction=EXTENSION, members=members)
        self.assertAlmostEqual(report.ratios[0], 1.0)
        self.assertTrue(np.isnan(report.ratios[1]))
        self.assertEqual(report.skipped, 1)

    def test_trace_direction(self):
        Q = DyadicCube(0, (0,))
        members = [_coeffs({((1, 0), lift(Q, 0)): 1.0}, n=2)]
        report = trace_norm_experiment(self.experiment, direction=TRACE, members=members)
        self.assertEqual(len(report.ratios), 1)
        self.assertGreater(report.max_ratio, 0.0)
        self.assertTrue(np.isfinite(report.refined_max_ratio))

    def test_precondition_warnings(self):
        low = self.experiment._replace(source=make_space_params("B", s=0.0, n=2))
        members = [_coeffs({((1,), DyadicCube(0, (0,))): 1.0})]
        with self.assertWarns(UserWarning):
            report = trace_norm_experiment(low, direction=EXTENSION, members=members)
        self.assertEqual(len(report.warnings), 1)

    def test_weighted_extension(self):
        weighted = self.experiment._replace(
            W=diag_power_weight([0.5], n=2), V=diag_power_weight([0.5], n=1)
        )
        members = [_coeffs({((1,), DyadicCube(0, (0,))): 1.0})]
        report = trace_norm_experiment(weighted, direction=EXTENSION, members=members)
        self.assertTrue(np.isfinite(report.certificate))
        self.assertGreater(report.ratios[0], 0.0)

    def test_direction(self):
        with self.assertRaises(ValueError):
            trace_norm_experiment(self.experiment, direction="both")
