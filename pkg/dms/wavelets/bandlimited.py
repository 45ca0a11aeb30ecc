# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math

import numpy as np

from ..lattice import DyadicCube

logger = logging.getLogger(__name__)

PARTITION_TOLERANCE = 1e-10


def bump(u: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - u²))`` on ``(-1, 1)``, zero elsewhere; ``bump(0) = 1``."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


class BandlimitedPair:
    """
    A radial pair ``(φ, ψ)`` with ``φ̂(ξ) = bump(log₂|ξ|)`` supported in
    ``1/2 <= |ξ| <= 2`` and ``ψ̂ = φ̂ / Σ_j φ̂(2^j ξ)²``, so that
    ``Σ_j conj(φ̂(2^j ξ)) ψ̂(2^j ξ) = 1`` for ``ξ ≠ 0``.

    Parameters
    ----------
    n : int
        Dimension; frequencies are read as ``|ξ|``, and for ``n > 1`` they are
        arrays whose last axis has length ``n``.
    points_per_octave : int
        Density of the log-frequency mesh.
    octaves : int
        The mesh spans ``octaves`` octaves centred at ``|ξ| = 1``.
    quadrature_nodes : int
        Gauss-Legendre nodes for the real-space inversion :meth:`psi`.

    Attributes
    ----------
    mesh : np.ndarray
        Frequencies ``|ξ|`` of the mesh.
    phi_hat_mesh, psi_hat_mesh : np.ndarray
        Values on the mesh.
    residual : float
        ``max |Σ_j conj(φ̂) ψ̂ (2^j ξ) - 1|`` on the mesh.
    """

    def __init__(
        self,
        n: int = 1,
        points_per_octave: int = 256,
        octaves: int = 4,
        quadrature_nodes: int = 256,
    ):
        self.n = n
        self.points_per_octave = points_per_octave
        self.octaves = octaves
        self.quadrature_nodes = quadrature_nodes
        exponents = np.linspace(
            -octaves / 2, octaves / 2, octaves * points_per_octave + 1
        )
        self.mesh = np.exp2(exponents)
        points = self.mesh
        if n > 1:
            # the mesh runs along the first axis
            points = np.zeros((len(self.mesh), n))
            points[:, 0] = self.mesh
        self.phi_hat_mesh = self.phi_hat(points)
        self.psi_hat_mesh = self.psi_hat(points)
        self.residual = float(np.max(np.abs(self.reproducing_sum(points) - 1.0)))

    def _magnitude(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.n > 1:
            return np.linalg.norm(xi, axis=-1)
        return np.abs(xi)

    @staticmethod
    def _phi_radial(radius: np.ndarray) -> np.ndarray:
        out = np.zeros(radius.shape)
        positive = radius > 0
        out[positive] = bump(np.log2(radius[positive]))
        return out

    @staticmethod
    def _partition_radial(radius: np.ndarray) -> np.ndarray:
        out = np.zeros(radius.shape)
        positive = radius > 0
        logs = np.log2(radius[positive])
        base = np.floor(-logs)
        total = np.zeros(logs.shape)
        for offset in (-1, 0, 1, 2):
            total += bump(logs + base + offset) ** 2
        out[positive] = total
        return out

    def _psi_radial(self, radius: np.ndarray) -> np.ndarray:
        phi = self._phi_radial(radius)
        out = np.zeros(phi.shape)
        support = phi > 0
        out[support] = phi[support] / self._partition_radial(radius)[support]
        return out

    def phi_hat(self, xi: np.ndarray) -> np.ndarray:
        return self._phi_radial(self._magnitude(xi))

    def partition(self, xi: np.ndarray) -> np.ndarray:
        """``Σ_j φ̂(2^j ξ)²``, positive for ``ξ ≠ 0``."""
        return self._partition_radial(self._magnitude(xi))

    def psi_hat(self, xi: np.ndarray) -> np.ndarray:
        return self._psi_radial(self._magnitude(xi))

    def reproducing_sum(self, xi: np.ndarray) -> np.ndarray:
        """``Σ_j conj(φ̂(2^j ξ)) ψ̂(2^j ξ)``."""
        radius = self._magnitude(xi)
        logs = np.log2(radius)
        base = np.floor(-logs)
        total = np.zeros(radius.shape)
        for offset in (-1, 0, 1, 2):
            scaled = radius * np.exp2(base + offset)
            total += self._phi_radial(scaled) * self._psi_radial(scaled)
        return total

    def psi(self, x: np.ndarray) -> np.ndarray:
        """
        ``ψ(x) = (1/π) ∫ ψ̂(ξ) cos(xξ) dξ`` over ``1/2 <= ξ <= 2`` for ``n = 1``.
        """
        if self.n != 1:
            raise ValueError("Real-space values are available for n = 1 only")
        nodes, weights = np.polynomial.legendre.leggauss(self.quadrature_nodes)
        xi = 1.25 + 0.75 * nodes
        weights = 0.75 * weights * self.psi_hat(xi)
        x = np.asarray(x, dtype=float)
        return (np.cos(np.multiply.outer(x, xi)) @ weights) / math.pi

    def psi_hat_q(self, xi: np.ndarray, Q: DyadicCube) -> np.ndarray:
        """
        Fourier transform of ``ψ_Q(x) = 2^{jn/2} ψ(2^j x - k)``, that is
        ``2^{-jn/2} e^{-i 2^{-j} k·ξ} ψ̂(2^{-j} ξ)``.
        """
        xi = np.asarray(xi, dtype=float)
        scaled = np.ldexp(xi, -Q.j)
        if self.n == 1:
            phase = scaled * Q.k[0]
        else:
            phase = scaled @ np.asarray(Q.k, dtype=float)
        return 2.0 ** (-Q.j * self.n / 2) * np.exp(-1j * phase) * self.psi_hat(scaled)

    def __repr__(self) -> str:
        return (
            f"BandlimitedPair(n={self.n}, points_per_octave={self.points_per_octave}, "
            f"residual={self.residual:.2e})"
        )


def build_bandlimited_pair(
    points_per_octave: int = 256, octaves: int = 4, n: int = 1
) -> BandlimitedPair:
    """
    Builds the band-limited pair and checks the reproducing identity on its mesh.

    Raises
    ------
    ValueError
        If the mesh covers fewer than four octaves.
    RuntimeError
        If the reproducing residual exceeds ``1e-10``.
    """
    if octaves < 4:
        raise ValueError(f"The mesh must cover at least 4 octaves, got {octaves}")
    pair = BandlimitedPair(n, points_per_octave, octaves)
    if pair.residual > PARTITION_TOLERANCE:
        raise RuntimeError(
            f"Reproducing identity residual {pair.residual:.3e} exceeds "
            f"{PARTITION_TOLERANCE}"
        )
    logger.info(f"Band-limited pair built, residual {pair.residual:.3e}")
    return pair
