# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from math import comb
from typing import List, NamedTuple, Optional

import numpy as np

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-12
MIN_LEVELS = 4
MAX_LEVELS = 14


class FilterPair(NamedTuple):
    """
    Daubechies filters with ``k`` vanishing moments.

    ``h`` is the scaling filter with ``Σ h = √2``, ``g`` the wavelet filter
    ``g_i = (-1)^i h_{2k-1-i}``, and ``c = √2 h`` the refinement mask with
    ``Σ c = 2`` used by the cascade.
    """

    h: np.ndarray
    g: np.ndarray
    c: np.ndarray

    @property
    def k(self) -> int:
        return len(self.h) // 2

    @property
    def d(self) -> np.ndarray:
        """Wavelet refinement mask ``√2 g``."""
        k2 = len(self.c)
        return np.array([(-1) ** i * self.c[k2 - 1 - i] for i in range(k2)])


def _polish(roots: np.ndarray, coefficients: np.ndarray, steps: int = 3) -> np.ndarray:
    derivative = np.polyder(coefficients)
    for _ in range(steps):
        step = np.polyval(coefficients, roots) / np.polyval(derivative, roots)
        roots = roots - np.where(np.isfinite(step), step, 0)
    return roots


def orthonormality_residual(h: np.ndarray) -> float:
    """``max_l |Σ_j h_j h_{j-2l} - δ_{0l}|``."""
    correlation = np.correlate(h, h, mode="full")
    center = len(h) - 1
    shifts = correlation[center::2]
    target = np.zeros_like(shifts)
    target[0] = 1.0
    return float(np.max(np.abs(shifts - target)))


def daubechies_filter(k: int) -> FilterPair:
    """
    The minimum-phase Daubechies filter of length ``2k``.

    The roots ``y`` of ``Σ_{i<k} C(k-1+i, i) y^i`` are mapped to ``z`` through
    ``z² - (2 - 4y) z + 1 = 0`` keeping the root inside the unit disk, and the filter
    is the coefficient vector of ``(z + 1)^k Π (z - z_r)``.

    Parameters
    ----------
    k : int
        Number of vanishing moments, in ``[1, 10]``.

    Returns
    -------
    FilterPair

    Raises
    ------
    ValueError
        If ``k`` is out of range.
    RuntimeError
        If root finding fails or the orthonormality residual exceeds ``1e-12``.

    Examples
    --------
    >>> np.round(daubechies_filter(2).h, 4)
    array([ 0.483 ,  0.8365,  0.2241, -0.1294])
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= 10:
        raise ValueError(f"k must be an integer in [1, 10], got {k}")
    polynomial = np.array([comb(k - 1 + i, i) for i in range(k)], dtype=float)[::-1]
    try:
        y_roots = _polish(np.roots(polynomial).astype(complex), polynomial)
    except np.linalg.LinAlgError as error:
        raise RuntimeError(f"Root finding failed for k={k}: {error}")
    z_roots: List[complex] = []
    for y in y_roots:
        candidates = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        z_roots.append(complex(candidates[np.argmin(np.abs(candidates))]))
    raw = np.real(np.poly(np.concatenate([-np.ones(k), np.asarray(z_roots)])))
    c = 2.0 * raw / raw.sum()
    h = c / np.sqrt(2.0)
    g = np.array([(-1) ** i * h[2 * k - 1 - i] for i in range(2 * k)])
    residual = orthonormality_residual(h)
    if residual > ORTHONORMALITY_TOLERANCE:
        raise RuntimeError(
            f"Daubechies filter k={k} has orthonormality residual {residual:.3e}"
        )
    logger.debug(f"Daubechies filter k={k}: orthonormality residual {residual:.3e}")
    return FilterPair(h=h, g=g, c=c)


class CascadeSamples(NamedTuple):
    """
    Cascade approximations of ``φ`` and ``ψ`` on ``[0, 2k-1]``.

    ``phi[L]`` and ``psi[L]`` hold the values at ``m / 2^L`` for
    ``m = 0, ..., (2k-1) 2^L``; entry ``L = 0`` of ``psi`` is unused. The level-``L``
    samples are the ``L``-fold iterated filters, so they are exactly orthonormal for
    the Riemann sum on the ``2^{-L}`` grid and the wavelet samples have exactly
    vanishing discrete moments.
    """

    k: int
    levels: int
    phi: List[np.ndarray]
    psi: List[np.ndarray]

    def grid(self, level: int) -> np.ndarray:
        return np.arange(len(self.phi[level])) / float(1 << level)


def _refine(mask: np.ndarray, previous: np.ndarray, level: int, k: int) -> np.ndarray:
    """Values at level ``level + 1`` of ``Σ_j mask_j f(2x - j)`` from level-``level`` ``f``."""
    step = 1 << level
    out = np.zeros((2 * k - 1) * 2 * step + 1)
    for j, weight in enumerate(mask):
        offset = j * step
        stop = min(len(out), offset + len(previous))
        out[offset:stop] += weight * previous[: stop - offset]
    return out


def cascade_samples(filters: FilterPair, levels: int = 10) -> CascadeSamples:
    """
    Runs the cascade refinement from the box function up to ``levels``.

    Raises
    ------
    ValueError
        If ``levels`` is outside ``[4, 14]``.
    """
    if not MIN_LEVELS <= levels <= MAX_LEVELS:
        raise ValueError(
            f"levels must lie in [{MIN_LEVELS}, {MAX_LEVELS}], got {levels}"
        )
    k = filters.k
    phi = [np.zeros(2 * k)]
    phi[0][0] = 1.0
    psi = [np.zeros(2 * k)]
    for level in range(levels):
        psi.append(_refine(filters.d, phi[level], level, k))
        phi.append(_refine(filters.c, phi[level], level, k))
    return CascadeSamples(k=k, levels=levels, phi=phi, psi=psi)


class K0(NamedTuple):
    k0: int
    value: float


def find_k0(samples: CascadeSamples, level: Optional[int] = None) -> K0:
    """
    The integer ``k₀`` of smallest modulus (nonnegative first on ties) with
    ``|φ(-k₀)| > 0.1 max|φ|``, read from the cascade samples at integer points.

    Raises
    ------
    RuntimeError
        If no integer point passes the threshold.
    """
    level = samples.levels if level is None else level
    values = samples.phi[level]
    step = 1 << level
    threshold = 0.1 * np.abs(values).max()
    support = len(values) // step
    for radius in range(support + 1):
        for k0 in sorted({radius, -radius}, reverse=True):
            index = -k0 * step
            if 0 <= index < len(values) and abs(values[index]) > threshold:
                return K0(k0=k0, value=float(values[index]))
    raise RuntimeError("No integer point of φ exceeds a tenth of its maximum")


def two_scale_residual(
    filters: FilterPair, samples: CascadeSamples, level: int, midpoints: bool = False
) -> float:
    """
    ``max |φ(x) - Σ_j c_j φ(2x - j)|`` with both sides read from the level-``level``
    samples, on the grid or (with ``midpoints``) at grid midpoints where the left
    side is linearly interpolated.
    """
    if not 1 <= level <= samples.levels:
        raise ValueError(f"level must lie in [1, {samples.levels}], got {level}")
    values = samples.phi[level]
    grid = samples.grid(level)
    step = 1 << level
    if midpoints:
        x = (grid[:-1] + grid[1:]) / 2
        left = np.interp(x, grid, values)
        doubled = np.arange(1, 2 * len(x), 2)
    else:
        x = grid
        left = values
        doubled = 2 * np.arange(len(x))
    right = np.zeros_like(left)
    for j, weight in enumerate(filters.c):
        index = doubled - j * step
        valid = (index >= 0) & (index < len(values))
        right[valid] += weight * values[index[valid]]
    return float(np.max(np.abs(left - right)))
