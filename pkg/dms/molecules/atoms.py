# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from math import comb
from typing import List, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from ..lattice import DyadicCube
from ..utils import multi_indices
from .brackets import bracket_fns
from .handles import SmoothFunctionHandle

logger = logging.getLogger(__name__)

# the bump lives on (-1, 1) in the variable u = (x - c_Q) / (DILATION · ℓ(Q))
DILATION = 1.5
GRAM_CONDITION_LIMIT = 1e12
LEGENDRE_NODES = 200
SUP_SAMPLES = 8001
SAFETY = 0.98


def _bump_derivative_polynomials(order: int) -> List[Polynomial]:
    """
    Polynomials ``P_r`` with ``β^{(r)}(u) = β(u) P_r(u) (1 - u²)^{-2r}`` for the bump
    ``β(u) = exp(1 - 1/(1 - u²))``.
    """
    u = Polynomial([0.0, 1.0])
    one_minus = 1 - u ** 2
    polynomials = [Polynomial([1.0])]
    for r in range(order):
        P = polynomials[-1]
        polynomials.append(-2 * u * P + one_minus ** 2 * P.deriv() + 4 * r * u * one_minus * P)
    return polynomials


def _bump_derivative(u: np.ndarray, r: int, polynomials: List[Polynomial]) -> np.ndarray:
    out = np.zeros(u.shape)
    inside = np.abs(u) < 1
    v = u[inside]
    one_minus = 1 - v ** 2
    log_factor = 1 - 1 / one_minus - 2 * r * np.log(one_minus)
    out[inside] = np.exp(log_factor) * polynomials[r](v)
    return out


def _moment_polynomial(L: int) -> Polynomial:
    """
    The monic polynomial of degree ``L + 1`` orthogonal to ``1, u, ..., u^L`` in
    ``L²(β du)``; the constant one when ``L < 0``.
    """
    if L < 0:
        return Polynomial([1.0])
    nodes, weights = np.polynomial.legendre.leggauss(LEGENDRE_NODES)
    beta = weights * _bump_derivative(nodes, 0, [Polynomial([1.0])])
    powers = nodes[None, :] ** np.arange(2 * L + 2)[:, None]
    moments = powers @ beta
    gram = np.array([[moments[r + s] for s in range(L + 1)] for r in range(L + 1)])
    condition = np.linalg.cond(gram)
    if condition > GRAM_CONDITION_LIMIT:
        raise ValueError(
            f"Moment Gram matrix of order {L} has condition number {condition:.3e}; "
            "lower L or allow more derivative headroom in N"
        )
    rhs = moments[L + 1 : 2 * L + 2]
    coefficients = np.linalg.solve(gram, rhs)
    return Polynomial(np.concatenate([-coefficients, [1.0]]))


class _AtomProfile:
    """The one-dimensional factor ``f(u) = β(u) P(u)`` and its derivatives."""

    def __init__(self, L: int, max_order: int):
        self.moment_polynomial = _moment_polynomial(L)
        self.bump_polynomials = _bump_derivative_polynomials(max(max_order, 0))

    def derivative(self, u: np.ndarray, r: int) -> np.ndarray:
        polynomials = self.bump_polynomials
        if r >= len(polynomials):
            polynomials = _bump_derivative_polynomials(r)
        out = np.zeros(u.shape)
        for i in range(r + 1):
            factor = self.moment_polynomial.deriv(r - i)(u)
            out += comb(r, i) * _bump_derivative(u, i, polynomials) * factor
        return out

    def sup(self, r: int) -> float:
        u = np.linspace(-1, 1, SUP_SAMPLES)
        return float(np.abs(self.derivative(u, r)).max())


def make_atom(Q: DyadicCube, L: float, N: float) -> SmoothFunctionHandle:
    """
    An ``(L, N)``-atom on ``Q``.

    The atom is ``A Π_i β(u_i) P(u_i)`` with ``u = (x - c_Q) / (1.5 ℓ(Q))``, so it is
    smooth and supported in ``3Q``. ``P`` is the monic polynomial of degree
    ``⌊L⌋ + 1`` orthogonal to lower degrees against ``β``, which gives vanishing
    moments of every order ``|γ| <= L``. The amplitude ``A`` is the largest value
    with ``|∂^γ a| <= |Q|^{-1/2 - |γ|/n}`` for ``|γ| <= N``, up to a 2% margin for
    the sampled suprema. Derivatives of every order are exact.

    Parameters
    ----------
    Q : DyadicCube
        The cube.
    L : float
        Moment order; no moments when negative.
    N : float
        Smoothness order.

    Returns
    -------
    SmoothFunctionHandle

    Raises
    ------
    ValueError
        If ``L`` or ``N`` is not finite or the moment Gram matrix is ill-conditioned.
    """
    if not (np.isfinite(L) and np.isfinite(N)):
        raise ValueError(f"Atom orders must be finite, got L={L}, N={N}")
    moment_order = bracket_fns(L).floor
    smooth_order = max(bracket_fns(N).floor, 0)
    profile = _AtomProfile(moment_order, smooth_order)
    n = Q.n
    sups = [profile.sup(r) for r in range(smooth_order + 1)]
    amplitude_unit = SAFETY * min(
        DILATION ** sum(gamma) / float(np.prod([sups[g] for g in gamma]))
        for gamma in multi_indices(n, smooth_order)
    )
    amplitude = amplitude_unit / np.sqrt(Q.volume)
    center = Q.center
    scale = DILATION * Q.side

    def derivative(points: np.ndarray, gamma: Tuple[int, ...]) -> np.ndarray:
        u = (points - center[None, :]) / scale
        out = np.full(len(points), amplitude * scale ** (-sum(gamma)))
        for axis, order in enumerate(gamma):
            out *= profile.derivative(u[:, axis], order)
        return out

    logger.info(
        f"Atom on {Q} with L={L}, N={N}: amplitude {amplitude:.6g}, "
        f"moment polynomial degree {profile.moment_polynomial.degree()}"
    )
    return SmoothFunctionHandle(
        lambda x: derivative(x, (0,) * n),
        n=n,
        derivative=derivative,
        radius=Q.side,
        label=f"atom(L={L}, N={N}) on {Q}",
    )
