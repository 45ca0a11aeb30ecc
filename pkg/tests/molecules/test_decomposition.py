# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import unittest

import numpy as np

from dms.lattice import DyadicCube
from dms.molecules import (
    SmoothFunctionHandle,
    decomposition_weight,
    make_atom,
    molecule_gram_matrix,
    psi_atom_decomposition,
)


def _indicator(Q):
    lower, upper = Q.corner[0], Q.corner[0] + Q.side
    return SmoothFunctionHandle(
        lambda x: ((x[:, 0] >= lower) & (x[:, 0] < upper)) / np.sqrt(Q.side),
        radius=Q.side,
    )


class TestDecompositionWeight(unittest.TestCase):
    def test_values(self):
        R = DyadicCube(1, (0,))
        self.assertEqual(decomposition_weight(R, R, 3.0), 1.0)
        self.assertAlmostEqual(decomposition_weight(R, DyadicCube(1, (2,)), 2.0), 1 / 9)
        with self.assertRaises(ValueError):
            decomposition_weight(R, DyadicCube(0, (0,)), 2.0)


class TestPsiAtomDecomposition(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.R = DyadicCube(1, (2,))
        cls.psi = make_atom(cls.R, 1.0, 1.0)
        cls.decomposition = psi_atom_decomposition(cls.psi, cls.R, 3.0, radius=3, level=6)

    def test_reconstruction(self):
        scale = float(np.abs(self.psi(self.R.center[None, :])).max())
        self.assertLess(self.decomposition.residual, 1e-10 * scale)
        self.assertEqual(len(self.decomposition.atoms), 7)
        self.assertEqual(self.decomposition.weights[self.R], 1.0)

    def test_pieces_sum_to_function(self):
        points = np.linspace(0.0, 2.5, 41)[:, None]
        total = sum(
            self.decomposition.weights[P] * atom(points)
            for P, atom in self.decomposition.atoms.items()
        )
        np.testing.assert_allclose(
            self.decomposition.constant * total, self.psi(points), atol=1e-10
        )

    def test_atom_size(self):
        # the sampling grid the pieces were normalized on
        unit = np.arange(-8 * 64, 9 * 64 + 1) / 64
        points = self.R.corner[None, :] + self.R.side * unit[:, None]
        for P, atom in self.decomposition.atoms.items():
            self.assertLessEqual(
                float(np.abs(atom(points)).max()), (1 + 1e-9) / np.sqrt(P.volume)
            )

    def test_arguments(self):
        with self.assertRaises(ValueError):
            psi_atom_decomposition(self.psi, self.R, 3.0, radius=-1)


class TestMoleculeGram(unittest.TestCase):
    def test_orthonormal_indicators(self):
        cubes = [DyadicCube(0, (-1,)), DyadicCube(0, (0,)), DyadicCube(1, (1,))]
        U = molecule_gram_matrix(_indicator, _indicator, cubes, cubes, -1.0, 1.0, level=6, drop_below=1e-12)
        self.assertAlmostEqual(U[(cubes[0], cubes[0])].real, 1.0)
        self.assertAlmostEqual(U[(cubes[2], cubes[2])].real, 1.0)
        self.assertAlmostEqual(U[(cubes[1], cubes[2])].real, np.sqrt(0.5))
        self.assertEqual(U[(cubes[0], cubes[1])], 0j)
        self.assertEqual(len(U), 5)

    def test_empty(self):
        self.assertEqual(len(molecule_gram_matrix(_indicator, _indicator, [], [], 0.0, 1.0)), 0)
