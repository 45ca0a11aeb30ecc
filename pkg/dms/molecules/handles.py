# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import itertools
from math import comb
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..lattice import DyadicCube

Evaluator = Callable[[np.ndarray], np.ndarray]
DerivativeEvaluator = Callable[[np.ndarray, Tuple[int, ...]], np.ndarray]

FD_EXPONENT = 12


class SmoothFunctionHandle:
    """
    A function on ``R^n`` with optional closed-form partial derivatives.

    Derivatives of order above ``max_order`` (or all of them when no derivative
    evaluator is given) fall back to central differences with step
    ``radius · 2^{-12}`` and one Richardson extrapolation.

    Parameters
    ----------
    evaluator : Callable[[np.ndarray], np.ndarray]
        Maps points ``(N, n)`` to values ``(N,)``.
    n : int
        Dimension.
    derivative : Optional[Callable[[np.ndarray, Tuple[int, ...]], np.ndarray]]
        ``∂^γ`` at points.
    max_order : Optional[int]
        Highest ``|γ|`` the derivative evaluator supports; unlimited when ``None``.
    radius : float
        Length scale of the function, used for the difference step.
    finite_differences : bool
        Whether the fallback is allowed.
    label : str
        Description used in reports.
    """

    def __init__(
        self,
        evaluator: Evaluator,
        n: int = 1,
        derivative: Optional[DerivativeEvaluator] = None,
        max_order: Optional[int] = None,
        radius: float = 1.0,
        finite_differences: bool = True,
        label: str = "",
    ):
        self.evaluator = evaluator
        self.n = n
        self._derivative = derivative
        self.max_order = max_order
        self.radius = radius
        self.finite_differences = finite_differences
        self.label = label

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self.evaluator(points))

    def has_exact(self, gamma: Sequence[int]) -> bool:
        if self._derivative is None:
            return sum(gamma) == 0
        return self.max_order is None or sum(gamma) <= self.max_order

    def derivative(self, points: np.ndarray, gamma: Sequence[int]) -> np.ndarray:
        """
        ``∂^γ`` at ``points``.

        Raises
        ------
        ValueError
            If the order is not available in closed form and differences are
            disabled.
        """
        gamma = tuple(int(g) for g in gamma)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if sum(gamma) == 0:
            return self(points)
        if self._derivative is not None and self.has_exact(gamma):
            return np.asarray(self._derivative(points, gamma))
        if not self.finite_differences:
            raise ValueError(
                f"Handle {self.label} has no derivative of order {sum(gamma)} and "
                "finite differences are disabled"
            )
        h = self.radius * 2.0 ** -FD_EXPONENT
        coarse = self._central_difference(points, gamma, h)
        fine = self._central_difference(points, gamma, h / 2)
        return (4 * fine - coarse) / 3

    def _central_difference(
        self, points: np.ndarray, gamma: Tuple[int, ...], h: float
    ) -> np.ndarray:
        stencils = []
        for order in gamma:
            stencils.append(
                [((-1) ** r * comb(order, r), (order / 2 - r) * h) for r in range(order + 1)]
            )
        total = np.zeros(len(points), dtype=complex)
        for terms in itertools.product(*stencils):
            coefficient = np.prod([c for c, _ in terms])
            shift = np.array([s for _, s in terms])
            total = total + coefficient * self(points + shift[None, :])
        result = total / h ** sum(gamma)
        return result.real if np.isrealobj(self(points[:1])) else result


def envelope(points: np.ndarray, Q: DyadicCube, K: float) -> np.ndarray:
    """``(u_K)_Q(x) = |Q|^{-1/2} (1 + |x - x_Q| / ℓ(Q))^{-K}``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    distance = np.linalg.norm(points - Q.corner[None, :], axis=1) / Q.side
    return (1.0 + distance) ** (-K) / np.sqrt(Q.volume)


def envelope_handle(Q: DyadicCube, K: float) -> SmoothFunctionHandle:
    """The envelope ``(u_K)_Q`` as a handle."""
    return SmoothFunctionHandle(
        lambda x: envelope(x, Q, K),
        n=Q.n,
        radius=Q.side,
        label=f"u_{K} on {Q}",
    )
