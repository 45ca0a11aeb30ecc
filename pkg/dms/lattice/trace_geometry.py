# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

from typing import NamedTuple, Optional

from .cubes import Box, DyadicCube, LatticeWindow


def lift(Qp: DyadicCube, i: int) -> DyadicCube:
    """
    The ``(n+1)``-cube ``P(Q', i) = Q' × [iℓ(Q'), (i+1)ℓ(Q'))``.

    >>> lift(DyadicCube(2, (3,)), -1)
    DyadicCube(j=2, k=(3, -1))
    """
    return DyadicCube(Qp.j, Qp.k + (int(i),))


def project(P: DyadicCube) -> DyadicCube:
    """
    Drops the last coordinate, ``I(P) = Q_{j, k'}``.
    """
    if P.n < 2:
        raise ValueError(f"Cannot project a cube of dimension {P.n}")
    return DyadicCube(P.j, P.k[:-1])


class ShadowCube(NamedTuple):
    """
    A dyadic ``(n+1)``-cube containing every ``P(S, i)`` with ``S ⊆ R`` dyadic,
    together with the achieved side ratio ``ℓ(Q) / ℓ(R)``.
    """

    cube: DyadicCube
    ratio: int


def shadow_cube(
    R: DyadicCube, i: int, window: Optional[LatticeWindow] = None
) -> ShadowCube:
    """
    Finds the minimal dyadic cube over the slab swept out by ``P(S, i)`` for all
    dyadic ``S ⊆ R``.

    The slab is ``R × [min(i, 0)ℓ(R), max(i+1, 0)ℓ(R))``. Starting at the scale of
    ``R`` the candidate is coarsened one scale at a time until a single cube covers the
    slab, which happens after at most ``ceil(log2(|i| + 1))`` steps.

    Parameters
    ----------
    R : DyadicCube
        A cube in ``n`` dimensions.
    i : int
        The vertical shift of the lifted cubes.
    window : Optional[LatticeWindow]
        If provided, an ``(n+1)``-dimensional window the result must lie in.

    Returns
    -------
    ShadowCube
        The covering cube and ``ℓ(Q)/ℓ(R)``.

    Raises
    ------
    ValueError
        If the covering cube leaves ``window``.
    """
    low = min(i, 0)
    high = max(i + 1, 0)
    depth = 0
    while (low >> depth) != ((high - 1) >> depth):
        depth += 1
    cube = DyadicCube(R.j - depth, tuple(ki >> depth for ki in R.k) + (low >> depth,))
    if window is not None and cube not in window:
        raise ValueError(
            f"Shadow cube {cube} of {R} at shift {i} leaves the window {window}"
        )
    return ShadowCube(cube=cube, ratio=1 << depth)


def shadow_ratio(R: DyadicCube, i: int) -> int:
    """
    The side ratio ``ℓ(Q) / ℓ(R)`` of the shadow cube of ``R`` at shift ``i``.

    >>> shadow_ratio(DyadicCube(0, (0,)), 1)
    2
    >>> shadow_ratio(DyadicCube(3, (5,)), -4)
    4
    """
    return shadow_cube(R, i).ratio


def middle_band(Qp: DyadicCube, i: int) -> Box:
    """
    The set ``E_{P(Q', i)} = Q' × [ℓ(Q')(i + 1/3), ℓ(Q')(i + 2/3))``.

    Its volume is a third of ``|P(Q', i)|``.
    """
    return middle_band_of(lift(Qp, i))


def middle_band_of(P: DyadicCube) -> Box:
    """
    The middle third of ``P`` in its last coordinate, for a cube of any dimension.
    """
    corner = P.corner
    side = P.side
    lower = corner.copy()
    upper = corner + side
    lower[-1] = corner[-1] + side / 3
    upper[-1] = corner[-1] + 2 * side / 3
    return Box(tuple(lower.tolist()), tuple(upper.tolist()))
