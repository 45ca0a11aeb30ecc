# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import unittest

import numpy as np

from dms.lattice import DyadicCube
from dms.molecules import MoleculeGrid
from dms.operators import (
    ProbeSet,
    SymbolHandle,
    abs_power_symbol,
    adjoint_moment_residual,
    identity_symbol,
    psido_apply,
    psido_handle,
    psido_molecule_experiment,
    sampled_psido,
    sin_abs_symbol,
    symbol_class_residual,
    symbol_from_config,
)
from dms.wavelets import build_bandlimited_pair


class TestSymbols(unittest.TestCase):
    def test_identity(self):
        sym = identity_symbol()
        x, xi = np.zeros((3, 1)), np.array([[0.5], [1.0], [-4.0]])
        np.testing.assert_array_equal(sym(x, xi), np.ones(3))
        np.testing.assert_array_equal(sym.derivative(x, xi, (0,), (1,)), np.zeros(3))
        self.assertEqual(sym.order, 0.0)

    def test_abs_power_derivatives(self):
        sym = abs_power_symbol(1.0)
        x, xi = np.zeros((2, 1)), np.array([[2.0], [-3.0]])
        np.testing.assert_allclose(sym(x, xi), [2.0, 3.0])
        np.testing.assert_allclose(sym.derivative(x, xi, (0,), (1,)), [1.0, -1.0])
        np.testing.assert_allclose(sym.derivative(x, xi, (0,), (2,)), [0.0, 0.0])
        np.testing.assert_allclose(sym.derivative(x, xi, (1,), (0,)), [0.0, 0.0])

    def test_sin_abs_derivatives(self):
        sym = sin_abs_symbol(2.0)
        x, xi = np.array([[0.3]]), np.array([[1.5]])
        np.testing.assert_allclose(sym(x, xi), [np.sin(0.3) * 2.25])
        np.testing.assert_allclose(sym.derivative(x, xi, (1,), (0,)), [np.cos(0.3) * 2.25])
        np.testing.assert_allclose(sym.derivative(x, xi, (1,), (1,)), [np.cos(0.3) * 3.0])

    def test_differences_in_two_dimensions(self):
        sym = abs_power_symbol(1.0, n=2)
        x, xi = np.zeros((1, 2)), np.array([[3.0, 4.0]])
        np.testing.assert_allclose(sym(x, xi), [5.0])
        np.testing.assert_allclose(sym.derivative(x, xi, (0, 0), (1, 0)), [0.6], rtol=1e-6)

    def test_sum(self):
        total = identity_symbol() + abs_power_symbol(2.0)
        self.assertEqual(total.order, 2.0)
        x, xi = np.zeros((1, 1)), np.array([[3.0]])
        np.testing.assert_allclose(total(x, xi), [10.0])
        np.testing.assert_allclose(total.derivative(x, xi, (0,), (1,)), [6.0])
        with self.assertRaises(ValueError):
            identity_symbol() + abs_power_symbol(1.0, n=2)

    def test_validation(self):
        with self.assertRaises(ValueError):
            SymbolHandle(lambda x, xi: x, order=-1.0)

    def test_from_config(self):
        self.assertEqual(symbol_from_config({"kind": "identity"}).label, "identity")
        self.assertEqual(symbol_from_config({"kind": "abs_power", "eta": 2.0}).order, 2.0)
        self.assertEqual(symbol_from_config({"kind": "sin_abs"}, n=2).n, 2)
        with self.assertRaises(ValueError):
            symbol_from_config({"kind": "log"})
        with self.assertRaises(TypeError):
            symbol_from_config("identity")


class TestSymbolClass(unittest.TestCase):
    def test_abs_power(self):
        self.assertAlmostEqual(
            symbol_class_residual(abs_power_symbol(1.0), 1.0, 0, 2), 1.0, places=12
        )

    def test_sin_abs(self):
        residual = symbol_class_residual(sin_abs_symbol(1.0), 1.0, 0, 1)
        self.assertLessEqual(residual, 1.0 + 1e-12)
        self.assertGreater(residual, 0.99)
        # each x derivative costs a factor |xi|, and the probes reach |xi| = 2^-6
        self.assertGreater(symbol_class_residual(sin_abs_symbol(1.0), 1.0, 1, 0), 1.0)

    def test_differences(self):
        residual = symbol_class_residual(
            abs_power_symbol(1.0, n=2), 1.0, 0, 1, ProbeSet(n=2, count=200)
        )
        self.assertAlmostEqual(residual, 1.0, places=5)

    def test_wrong_order_grows(self):
        probes = ProbeSet(count=200)
        residual = symbol_class_residual(abs_power_symbol(2.0), 1.0, 0, 0, probes)
        self.assertGreater(residual, 1.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            symbol_class_residual(identity_symbol(), 0.0, 0, 0, ProbeSet(n=2))


class TestPsidoApply(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.pair = build_bandlimited_pair(points_per_octave=64)
        cls.x = np.linspace(-3.0, 3.0, 13)

    def test_identity_reproduces_psi(self):
        values = psido_apply(identity_symbol(), self.pair, DyadicCube(0, (0,)), self.x)
        np.testing.assert_allclose(values.real, self.pair.psi(self.x), atol=1e-8)
        np.testing.assert_allclose(values.imag, 0.0, atol=1e-8)

    def test_dilated_translate(self):
        Q = DyadicCube(1, (1,))
        values = psido_apply(identity_symbol(), self.pair, Q, self.x)
        expected = np.sqrt(2.0) * self.pair.psi(2 * self.x - 1)
        np.testing.assert_allclose(values.real, expected, atol=1e-8)

    def test_derivative(self):
        Q = DyadicCube(0, (0,))
        values = psido_apply(identity_symbol(), self.pair, Q, self.x, order=1)
        h = 1e-5
        expected = (self.pair.psi(self.x + h) - self.pair.psi(self.x - h)) / (2 * h)
        np.testing.assert_allclose(values.real, expected, atol=1e-6)

    def test_handle_scaling(self):
        Q = DyadicCube(1, (0,))
        sym = abs_power_symbol(1.0)
        handle = psido_handle(sym, self.pair, Q)
        np.testing.assert_allclose(
            handle(self.x[:, None]), 0.5 * psido_apply(sym, self.pair, Q, self.x)
        )
        self.assertTrue(handle.has_exact((1,)))

    def test_sampled(self):
        Q = DyadicCube(0, (0,))
        points, values = sampled_psido(identity_symbol(), self.pair, Q, radius=1.0, level=3)
        self.assertEqual(len(points), 8 + 16 + 1)
        np.testing.assert_allclose(values, psido_apply(identity_symbol(), self.pair, Q, points))

    def test_validation(self):
        with self.assertRaises(ValueError):
            psido_apply(identity_symbol(), self.pair, DyadicCube(0, (0,)), np.array([1e5]))
        pair = build_bandlimited_pair(points_per_octave=16, n=2)
        with self.assertRaises(ValueError):
            psido_apply(identity_symbol(), pair, DyadicCube(0, (0,)), self.x)

    def test_adjoint_degree(self):
        self.assertEqual(
            adjoint_moment_residual(identity_symbol(), self.pair, DyadicCube(0, (0,)), -1),
            0.0,
        )


class TestPsidoExperiment(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.pair = build_bandlimited_pair(points_per_octave=64)
        cls.cubes = [DyadicCube(0, (0,)), DyadicCube(2, (0,))]
        cls.grid = MoleculeGrid(radius=3.0, level=5)

    def test_identity_constant_is_scale_free(self):
        report = psido_molecule_experiment(
            identity_symbol(), self.pair, self.cubes, 2.0, 0.5, self.grid
        )
        self.assertTrue(report.passed, msg=str(report.constants))
        self.assertAlmostEqual(report.spread, 1.0, places=6)
        self.assertIsNone(report.adjoint_residual)
        self.assertEqual(report.params.L, -1.0)
        self.assertEqual(len(report.to_dict()["cubes"]), 2)

    def test_adjoint_regime(self):
        report = psido_molecule_experiment(
            abs_power_symbol(1.0), self.pair, self.cubes[:1], 2.0, 0.5, self.grid, F_star=1.0
        )
        self.assertIsNotNone(report.adjoint_residual)
        self.assertGreaterEqual(report.adjoint_residual, 0.0)

    def test_abs_symbol_constant_over_three_scales(self):
        cubes = [DyadicCube(j, (0,)) for j in range(3)]
        report = psido_molecule_experiment(
            abs_power_symbol(1.0), self.pair, cubes, 2.0, 0.5, self.grid, F_star=1.0
        )
        self.assertEqual(len(report.constants), 3)
        self.assertTrue(np.isfinite(report.spread))
        self.assertLessEqual(report.spread, 1.2)

    def test_needs_cubes(self):
        with self.assertRaises(ValueError):
            psido_molecule_experiment(identity_symbol(), self.pair, [], 2.0, 0.5)
