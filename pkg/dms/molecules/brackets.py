# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
from typing import NamedTuple


class Brackets(NamedTuple):
    """
    Integer functions of a real ``r``: ``strict_ceil`` is the least integer ``> r``,
    ``ceil`` the least ``>= r``, ``strict_floor`` the greatest ``< r``, ``floor`` the
    greatest ``<= r`` and ``star = r - strict_floor`` lies in ``(0, 1]``.
    """

    strict_ceil: int
    ceil: int
    strict_floor: int
    floor: int
    star: float


def bracket_fns(r: float) -> Brackets:
    """
    >>> bracket_fns(2.0)
    Brackets(strict_ceil=3, ceil=2, strict_floor=1, floor=2, star=1.0)
    """
    if not math.isfinite(r):
        raise ValueError(f"Brackets need a finite argument, got {r}")
    floor = math.floor(r)
    ceil = math.ceil(r)
    strict_floor = ceil - 1
    return Brackets(
        strict_ceil=floor + 1,
        ceil=ceil,
        strict_floor=strict_floor,
        floor=floor,
        star=r - strict_floor,
    )
