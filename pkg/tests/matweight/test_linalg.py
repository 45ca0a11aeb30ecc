# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from dms.matweight import batch_mat_power, jacobi_eigh, mat_power, operator_norms


def _random_hermitian(m, seed, positive=False):
    rng = np.random.RandomState(seed)
    X = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    if positive:
        return X @ np.conj(X.T) + m * np.eye(m)
    return (X + np.conj(X.T)) / 2


class TestJacobi(unittest.TestCase):
    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2 ** 16))
    def test_matches_lapack(self, m, seed):
        A = _random_hermitian(m, seed)
        eigenvalues, eigenvectors = jacobi_eigh(A)
        np.testing.assert_allclose(eigenvalues, np.linalg.eigvalsh(A), atol=1e-10)
        np.testing.assert_allclose(
            np.conj(eigenvectors.T) @ eigenvectors, np.eye(m), atol=1e-10
        )
        np.testing.assert_allclose(
            (eigenvectors * eigenvalues) @ np.conj(eigenvectors.T), A, atol=1e-10
        )

    def test_deterministic(self):
        A = _random_hermitian(4, 7)
        first = jacobi_eigh(A)
        second = jacobi_eigh(A)
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])

    def test_rejects_non_hermitian(self):
        with self.assertRaises(ValueError):
            jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with self.assertRaises(ValueError):
            jacobi_eigh(np.ones((2, 3)))

    def test_sweep_cap(self):
        with self.assertRaises(RuntimeError):
            jacobi_eigh(_random_hermitian(5, 3), max_sweeps=0)


class TestMatPower(unittest.TestCase):
    def test_square_root(self):
        A = _random_hermitian(3, 11, positive=True)
        root = mat_power(A, 0.5)
        np.testing.assert_allclose(root @ root, A, atol=1e-10)

    def test_real_input_gives_real_output(self):
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        self.assertFalse(np.iscomplexobj(mat_power(A, -1.0)))
        np.testing.assert_allclose(mat_power(A, -1.0), np.linalg.inv(A), atol=1e-12)

    def test_methods_agree(self):
        A = _random_hermitian(4, 5, positive=True)
        np.testing.assert_allclose(
            mat_power(A, 0.3), mat_power(A, 0.3, method="eigh"), atol=1e-10
        )
        with self.assertRaises(ValueError):
            mat_power(A, 0.3, method="qr")

    def test_not_positive_definite(self):
        with self.assertRaises(ValueError):
            mat_power(np.diag([1.0, -1.0]), 0.5)
        with self.assertRaises(ValueError):
            batch_mat_power(np.stack([np.eye(2), np.diag([1.0, 0.0])]), 0.5)

    def test_batch_matches_single(self):
        stack = np.stack([_random_hermitian(3, seed, positive=True) for seed in range(4)])
        batch = batch_mat_power(stack, -0.5)
        for A, powered in zip(stack, batch):
            np.testing.assert_allclose(powered, mat_power(A, -0.5), atol=1e-10)

    def test_operator_norms(self):
        stack = np.stack([np.diag([3.0, 1.0]), np.eye(2)])
        np.testing.assert_allclose(operator_norms(stack), [3.0, 1.0])
