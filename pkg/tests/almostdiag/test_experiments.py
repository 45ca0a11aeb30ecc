# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import unittest

import numpy as np

from dms.almostdiag import (
    AdEnvelope,
    EnsembleSpec,
    EnvelopeFactory,
    IdentityFactory,
    empirical_boundedness,
    identity_matrix,
    refinement_probe,
    thresholds,
)
from dms.lattice import LatticeWindow
from dms.matweight import QuadratureSpec, identity_weight
from dms.seqspace import make_space_params


class TestEnsembleSpec(unittest.TestCase):
    def test_scale_range(self):
        members = EnsembleSpec(size=3, support_size=2, scales=(1, 1)).draw(
            LatticeWindow(0, 2, 1, 0), 1
        )
        self.assertEqual(len(members), 3)
        self.assertTrue(all(Q.j == 1 for t in members for Q in t.support))

    def test_seeded(self):
        spec = EnsembleSpec(size=2, support_size=3, seed=4)
        window = LatticeWindow(0, 2, 1, 1)
        first, second = spec.draw(window, 2), spec.draw(window, 2)
        self.assertEqual(first[1].support, second[1].support)


class TestEmpiricalBoundedness(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.window = LatticeWindow(0, 2, 1, 1)
        cls.ensemble = EnsembleSpec(size=5, support_size=3, seed=1)
        cls.params = make_space_params("B", p=2.0, q=2.0)

    def test_identity_ratios_are_one(self):
        report = empirical_boundedness(
            IdentityFactory(), identity_weight(), self.params, self.ensemble, self.window
        )
        np.testing.assert_allclose(report.ratios, 1.0)
        np.testing.assert_allclose(report.refined_ratios, 1.0)
        self.assertAlmostEqual(report.drift, 0.0)
        self.assertEqual(report.skipped, 0)

    def test_scaled_identity(self):
        report = empirical_boundedness(
            IdentityFactory(2.0), identity_weight(), self.params, self.ensemble, self.window
        )
        self.assertAlmostEqual(report.max_ratio, 2.0)
        self.assertAlmostEqual(report.median_ratio, 2.0)

    def test_fixed_matrix(self):
        U = identity_matrix(self.window.all_cubes())
        params = make_space_params("F", p=1.5, q=1.0, m=2)
        report = empirical_boundedness(
            U, identity_weight(1, 2), params, self.ensemble, self.window
        )
        self.assertAlmostEqual(report.refined_max_ratio, 1.0)

    def test_envelope_is_bounded_above_thresholds(self):
        report = empirical_boundedness(
            EnvelopeFactory(AdEnvelope(3.0, 2.0, 2.0)),
            identity_weight(),
            self.params,
            self.ensemble,
            self.window,
        )
        self.assertTrue(np.all(report.ratios > 0))
        self.assertLess(report.max_ratio, 10.0)

    def test_refinement_drift_above_thresholds(self):
        ensemble = EnsembleSpec(size=50)
        for family in ["B", "F"]:
            params = make_space_params(family, p=2.0, q=2.0)
            limits = thresholds(params, 0.0, 0.0)
            envelope = AdEnvelope(
                limits.D_star + 0.5, limits.E_star + 0.5, limits.F_star + 0.5
            )
            for window in [LatticeWindow(-1, 3, 1, 1), LatticeWindow(-2, 4, 1, 2)]:
                with self.subTest(family=family, window=window):
                    report = empirical_boundedness(
                        EnvelopeFactory(envelope),
                        identity_weight(),
                        params,
                        ensemble,
                        window,
                    )
                    self.assertEqual(len(report.ratios), 50)
                    self.assertLessEqual(report.drift, 0.10)


class TestRefinementProbe(unittest.TestCase):
    def test_shape(self):
        report = refinement_probe(
            identity_weight(),
            make_space_params("B", p=2.0, q=2.0),
            AdEnvelope(0.5, 0.25, 0.25),
            LatticeWindow(0, 1, 1, 0),
            refinements=2,
            quad=QuadratureSpec(r=2),
        )
        self.assertEqual(report.j_max, [1, 2, 3])
        self.assertEqual(len(report.ratios), 3)
        self.assertTrue(all(ratio > 1.0 for ratio in report.ratios))
        self.assertGreater(report.ratios[-1], report.ratios[0])
