# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import unittest

import numpy as np

from dms.almostdiag import (
    AdEnvelope,
    EnvelopeOperator,
    OperatorMatrix,
    apply,
    certify,
    compose,
    envelope_matrix,
    identity_matrix,
    udef_block,
    udef_entries,
    udef_entry,
)
from dms.lattice import DyadicCube, LatticeWindow
from dms.seqspace import CoeffSequence, random_sequence

ENV = AdEnvelope(2.0, 1.0, 1.5)


class TestEnvelope(unittest.TestCase):
    def test_entry_values(self):
        Q, R = DyadicCube(0, (0,)), DyadicCube(0, (3,))
        self.assertAlmostEqual(udef_entry(Q, R, ENV), 4.0 ** -2)
        self.assertAlmostEqual(udef_entry(Q, Q, ENV), 1.0)
        self.assertAlmostEqual(
            udef_entry(DyadicCube(0, (0,)), DyadicCube(2, (0,)), ENV), 4.0 ** -1.5
        )

    def test_vectorized_matches_scalar(self):
        cubes = LatticeWindow(-1, 1, 2, 0).all_cubes()
        rows = [Q for Q in cubes for _ in cubes]
        cols = [R for _ in cubes for R in cubes]
        expected = [udef_entry(Q, R, ENV) for Q, R in zip(rows, cols)]
        np.testing.assert_allclose(udef_entries(rows, cols, ENV), expected, rtol=1e-12)

    def test_minimum(self):
        self.assertEqual(ENV.minimum(AdEnvelope(3.0, 0.5, 2.0)), AdEnvelope(2.0, 0.5, 1.5))


class TestOperatorMatrix(unittest.TestCase):
    def setUp(self):
        self.cubes = LatticeWindow(0, 1, 1, 0).all_cubes()
        self.U = envelope_matrix(self.cubes, ENV)

    def test_certify_own_envelope(self):
        self.assertAlmostEqual(certify(self.U, ENV), 1.0)
        self.assertEqual(self.U.certificate.envelope, ENV)
        # the extra decay is paid back by the largest scaled distance, 4
        self.assertAlmostEqual(certify(self.U, AdEnvelope(3.0, 1.0, 1.5)), 4.0)

    def test_scaling_keeps_certificate(self):
        certify(self.U, ENV)
        scaled = 3.0 * self.U
        self.assertAlmostEqual(scaled.certificate.C, 3.0)
        self.assertAlmostEqual(certify(scaled, ENV), 3.0)

    def test_empty_certificate(self):
        self.assertEqual(certify(OperatorMatrix({}, 1), ENV), 0.0)

    def test_access(self):
        self.assertEqual(len(self.U), 36)
        self.assertEqual(self.U.rows, self.cubes)
        Q = DyadicCube(5, (0,))
        self.assertEqual(self.U[(Q, Q)], 0j)
        restricted = self.U.restricted([(self.cubes[0], self.cubes[0]), (Q, Q)])
        self.assertEqual(len(restricted), 1)

    def test_csr(self):
        matrix = self.U.to_csr()
        self.assertEqual(matrix.shape, (6, 6))
        np.testing.assert_allclose(matrix.diagonal(), np.ones(6))
        partial = self.U.to_csr(self.cubes[:2], self.cubes[:3])
        self.assertEqual(partial.shape, (2, 3))

    def test_json(self):
        certify(self.U, ENV)
        document = self.U.to_json()
        self.assertEqual(document["certificate"]["envelope"], {"D": 2.0, "E": 1.0, "F": 1.5})
        first = document["entries"][0]
        self.assertEqual(first["row"], {"j": 0, "k": [-1]})
        self.assertEqual(first["col"], {"j": 0, "k": [-1]})
        self.assertEqual(identity_matrix([]).to_json()["entries"], [])


class TestApply(unittest.TestCase):
    def test_identity(self):
        window = LatticeWindow(0, 2, 1, 1)
        t = random_sequence(window, 5, m=2, random_state=0)
        image = apply(identity_matrix(window.all_cubes()), t)
        self.assertEqual(image.dropped_mass, 0.0)
        self.assertEqual(image.sequence.support, t.support)
        for Q in t.support:
            np.testing.assert_allclose(image.sequence[Q], t[Q])

    def test_cutoff(self):
        Q, R = DyadicCube(0, (0,)), DyadicCube(0, (1,))
        U = OperatorMatrix({(Q, Q): 1.0, (Q, R): 1e-10}, 1)
        t = CoeffSequence({Q: 1.0, R: 2.0}, 1)
        truncated = apply(U, t)
        self.assertAlmostEqual(truncated.dropped_mass, 2e-10)
        np.testing.assert_allclose(truncated.sequence[Q], [1.0])
        full = apply(U, t, cutoff=0.0)
        self.assertEqual(full.dropped_mass, 0.0)
        np.testing.assert_allclose(full.sequence[Q], [1.0 + 2e-10])

    def test_empty(self):
        self.assertEqual(len(apply(OperatorMatrix({}, 1), CoeffSequence.empty(1)).sequence), 0)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            apply(identity_matrix([DyadicCube(0, (0, 0))]), CoeffSequence.empty(1))


class TestEnvelopeOperator(unittest.TestCase):
    def setUp(self):
        self.window = LatticeWindow(0, 2, 1, 1)
        self.cubes = self.window.all_cubes()

    def test_block_matches_pairs(self):
        block = udef_block(self.cubes, self.cubes[:5], ENV)
        rows = [Q for Q in self.cubes for _ in range(5)]
        cols = [R for _ in self.cubes for R in self.cubes[:5]]
        np.testing.assert_allclose(
            block.ravel(), udef_entries(rows, cols, ENV), rtol=1e-12
        )

    def test_apply_matches_stored_matrix(self):
        implicit = EnvelopeOperator(self.cubes, ENV, 2.0)
        stored = 2.0 * envelope_matrix(self.cubes, ENV)
        t = random_sequence(self.window, 5, m=2, random_state=0)
        for cutoff in [0.0, 5e-2]:
            expected = apply(stored, t, cutoff)
            image = apply(implicit, t, cutoff)
            self.assertEqual(image.sequence.support, expected.sequence.support)
            for Q in expected.sequence.support:
                np.testing.assert_allclose(image.sequence[Q], expected.sequence[Q])
            self.assertAlmostEqual(image.dropped_mass, expected.dropped_mass)
        self.assertGreater(apply(implicit, t, 5e-2).dropped_mass, 0.0)

    def test_certificate_and_scaling(self):
        implicit = -3.0 * EnvelopeOperator(self.cubes, ENV)
        self.assertEqual(implicit.certificate, (ENV, 3.0))
        stored = implicit.materialize()
        self.assertEqual(len(stored), len(implicit))
        self.assertAlmostEqual(certify(stored, ENV), 3.0)

    def test_columns_outside_the_window_are_ignored(self):
        implicit = EnvelopeOperator(self.cubes, ENV)
        Q = DyadicCube(7, (0,))
        self.assertNotIn(Q, implicit)
        image = apply(implicit, CoeffSequence({Q: 1.0}, 1))
        self.assertEqual(len(image.sequence), 0)

    def test_default_window_is_applied_column_by_column(self):
        window = LatticeWindow()
        implicit = EnvelopeOperator(window.all_cubes(), ENV)
        self.assertEqual(len(implicit.cubes), 2046)
        t = random_sequence(window, 8, random_state=1)
        image = apply(implicit, t, cutoff=0.0).sequence
        self.assertEqual(len(image), 2046)
        Q = implicit.cubes[1000]
        expected = sum(udef_entry(Q, R, ENV) * t[R][0] for R in t.support)
        np.testing.assert_allclose(image[Q], [expected])


class TestCompose(unittest.TestCase):
    def test_identity_is_neutral(self):
        cubes = LatticeWindow(0, 1, 1, 0).all_cubes()
        U = envelope_matrix(cubes, ENV)
        certify(U, ENV)
        identity = identity_matrix(cubes)
        certify(identity, AdEnvelope(4.0, 2.0, 2.0))
        product = compose(identity, U)
        for pair, value in U.entries.items():
            self.assertAlmostEqual(product[pair], value)
        self.assertEqual(product.certificate.envelope, ENV)
        self.assertAlmostEqual(product.certificate.C, 1.0)

    def test_window_restricts_middle(self):
        cubes = LatticeWindow(0, 1, 1, 0).all_cubes()
        identity = identity_matrix(cubes)
        certify(identity, ENV)
        product = compose(identity, identity, LatticeWindow(0, 0, 1, 0))
        self.assertEqual(len(product), 2)

    def test_needs_certificates(self):
        identity = identity_matrix([DyadicCube(0, (0,))])
        with self.assertRaises(ValueError):
            compose(identity, identity)
