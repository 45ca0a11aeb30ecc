# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from typing import NamedTuple, Sequence, Tuple

import numpy as np

from ..lattice import Box, DyadicCube
from ..utils import cartesian_product

MIDPOINT = "midpoint"
GAUSS = "gauss"


class QuadratureSpec(NamedTuple):
    """
    Tensor quadrature on boxes with ``2^r`` nodes per axis. Weights are normalized to
    sum to one, so a weighted sum is an average over the box.

    The midpoint rule is the reference rule; its nodes never sit on the boundary of a
    dyadic cube, in particular never on the origin for cubes touching it.
    """

    rule: str = MIDPOINT
    r: int = 5

    @property
    def nodes_per_axis(self) -> int:
        return 1 << self.r

    def unit_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and normalized weights on ``[0, 1)``."""
        count = self.nodes_per_axis
        if self.rule == MIDPOINT:
            return (np.arange(count) + 0.5) / count, np.full(count, 1.0 / count)
        if self.rule == GAUSS:
            nodes, weights = np.polynomial.legendre.leggauss(count)
            return (nodes + 1) / 2, weights / 2
        raise ValueError(f"Unknown quadrature rule {self.rule!r}")

    def box_nodes(
        self, lower: Sequence[float], upper: Sequence[float]
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Tensor nodes of shape ``(N, n)`` and weights of shape ``(N,)`` on the box
        ``[lower, upper)``.
        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        unit, unit_weights = self.unit_nodes()
        axes = [lo + (up - lo) * unit for lo, up in zip(lower, upper)]
        points = cartesian_product(*axes)
        weights = np.prod(cartesian_product(*([unit_weights] * len(lower))), axis=1)
        return points, weights

    def cube_nodes(self, Q: DyadicCube) -> Tuple[np.ndarray, np.ndarray]:
        box = Box.of_cube(Q)
        return self.box_nodes(box.lower, box.upper)

    def to_dict(self) -> dict:
        return {"rule": self.rule, "r": self.r}


def check_quadrature(quad: QuadratureSpec) -> QuadratureSpec:
    if quad.rule not in (MIDPOINT, GAUSS):
        raise ValueError(f"Unknown quadrature rule {quad.rule!r}")
    if quad.r < 0 or quad.r > 12:
        raise ValueError(f"Quadrature level r must lie in [0, 12], got {quad.r}")
    return quad


def dilate(Q: DyadicCube, factor: float) -> Box:
    """The box with the center of ``Q`` and side ``factor * ℓ(Q)``."""
    half = factor * Q.side / 2
    center = Q.center
    return Box(tuple((center - half).tolist()), tuple((center + half).tolist()))
