# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from typing import Tuple

import numpy as np

from ..utils import hermitian_part, is_almost_hermitian

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-13
JACOBI_MAX_SWEEPS = 60


def _check_hermitian(A: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"Expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("Matrix has non-finite entries")
    if not is_almost_hermitian(A, rtol=rtol):
        raise ValueError("Matrix is not Hermitian within relative tolerance")
    return hermitian_part(A)


def jacobi_eigh(
    A: np.ndarray,
    tol: float = JACOBI_TOLERANCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a Hermitian matrix by the cyclic complex Jacobi method.

    Each pivot ``(p, q)`` is first made real by a diagonal phase and then annihilated
    with a plane rotation. Pivots are visited in row-major order, so the result is
    reproducible bit for bit on one platform.

    Parameters
    ----------
    A : np.ndarray
        Hermitian matrix of shape ``(m, m)``.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm is below
        ``tol * ||A||_F``.
    max_sweeps : int
        Sweep cap.

    Returns
    -------
    eigenvalues : np.ndarray
        Real eigenvalues in ascending order.
    eigenvectors : np.ndarray
        Unitary matrix whose columns are the matching eigenvectors.

    Raises
    ------
    ValueError
        If ``A`` is not square and Hermitian.
    RuntimeError
        If the sweep cap is reached before convergence.
    """
    A = _check_hermitian(A).astype(complex)
    if A.ndim != 2:
        raise ValueError(f"jacobi_eigh expects a single matrix, got shape {A.shape}")
    m = A.shape[0]
    V = np.eye(m, dtype=complex)
    scale = np.linalg.norm(A)
    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        if sweep == max_sweeps:
            raise RuntimeError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})"
            )
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = 0.5 * np.arctan2(2 * r, (A[q, q] - A[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                rotation = np.array(
                    [[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex
                )
                pq = [p, q]
                A[:, pq] = A[:, pq] @ rotation
                A[pq, :] = np.conj(rotation.T) @ A[pq, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, pq] = V[:, pq] @ rotation
    eigenvalues = np.diag(A).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], V[:, order]


def mat_power(A: np.ndarray, alpha: float, method: str = "jacobi") -> np.ndarray:
    """
    Fractional power ``A^α = U diag(λ_i^α) U*`` of a Hermitian positive definite
    matrix.

    Parameters
    ----------
    A : np.ndarray
        Hermitian positive definite matrix.
    alpha : float
        The exponent.
    method : str
        ``"jacobi"`` (default) for :func:`jacobi_eigh`, ``"eigh"`` for LAPACK.

    Returns
    -------
    np.ndarray
        ``A^α``; real when ``A`` is real.

    Raises
    ------
    ValueError
        If ``A`` is not positive definite.

    Examples
    --------
    >>> np.allclose(mat_power(np.diag([4.0, 1.0]), 0.5), np.diag([2.0, 1.0]))
    True
    """
    A = np.asarray(A)
    if method == "jacobi":
        eigenvalues, eigenvectors = jacobi_eigh(A)
    elif method == "eigh":
        eigenvalues, eigenvectors = np.linalg.eigh(_check_hermitian(A))
    else:
        raise ValueError(f"Unknown eigensolver {method!r}")
    if eigenvalues[0] <= 0:
        raise ValueError(
            f"Matrix is not positive definite (smallest eigenvalue {eigenvalues[0]:.3e})"
        )
    powered = (eigenvectors * eigenvalues ** alpha) @ np.conj(eigenvectors.T)
    if not np.iscomplexobj(A):
        return powered.real
    return powered


def batch_mat_power(stack: np.ndarray, alpha: float) -> np.ndarray:
    """
    :func:`mat_power` over a stack of shape ``(N, m, m)`` using LAPACK.
    """
    stack = _check_hermitian(stack)
    eigenvalues, eigenvectors = np.linalg.eigh(stack)
    if np.any(eigenvalues <= 0):
        raise ValueError("A matrix in the stack is not positive definite")
    powered = np.einsum(
        "...ik,...k,...jk->...ij", eigenvectors, eigenvalues ** alpha, np.conj(eigenvectors)
    )
    if not np.iscomplexobj(stack):
        return powered.real
    return powered


def operator_norms(stack: np.ndarray) -> np.ndarray:
    """Spectral norms over the last two axes."""
    return np.linalg.norm(stack, ord=2, axis=(-2, -1))
