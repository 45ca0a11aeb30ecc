# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import itertools
import math
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np


class DyadicCube(NamedTuple):
    """
    The half-open dyadic cube ``Q_{j,k} = 2^{-j}([0,1)^n + k)``.

    The ambient dimension is the length of ``k``. Two cubes are equal exactly when
    their scale and position tuples are equal; containment is decided on the integer
    indices only.
    """

    j: int
    k: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def side(self) -> float:
        """Edge length ``ℓ(Q) = 2^{-j}``."""
        return math.ldexp(1.0, -self.j)

    @property
    def volume(self) -> float:
        return math.ldexp(1.0, -self.j * self.n)

    @property
    def corner(self) -> np.ndarray:
        """Lower-left corner ``x_Q = 2^{-j} k``."""
        return np.ldexp(np.asarray(self.k, dtype=float), -self.j)

    @property
    def center(self) -> np.ndarray:
        return np.ldexp(np.asarray(self.k, dtype=float) + 0.5, -self.j)

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.j - 1, tuple(ki >> 1 for ki in self.k))

    def ancestor(self, j: int) -> "DyadicCube":
        """The unique cube at the coarser (or equal) scale ``j`` containing this one."""
        if j > self.j:
            raise ValueError(f"Scale {j} is finer than the cube scale {self.j}")
        shift = self.j - j
        return DyadicCube(j, tuple(ki >> shift for ki in self.k))

    def children(self) -> List["DyadicCube"]:
        return [
            DyadicCube(self.j + 1, tuple(2 * ki + bit for ki, bit in zip(self.k, bits)))
            for bits in itertools.product((0, 1), repeat=self.n)
        ]

    def descendants(self, j: int) -> List["DyadicCube"]:
        """All cubes at the finer (or equal) scale ``j`` inside this one."""
        if j < self.j:
            raise ValueError(f"Scale {j} is coarser than the cube scale {self.j}")
        width = 1 << (j - self.j)
        return [
            DyadicCube(j, tuple(width * ki + offset for ki, offset in zip(self.k, offs)))
            for offs in itertools.product(range(width), repeat=self.n)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"j": int(self.j), "k": [int(ki) for ki in self.k]}

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "DyadicCube":
        try:
            return make_cube(data["j"], data["k"])
        except KeyError as missing:
            raise ValueError(f"Cube record {data!r} is missing field {missing}")


def make_cube(j: int, k: Any) -> DyadicCube:
    """
    Builds a :class:`DyadicCube` from a scale and a position that may be given as an
    integer (``n = 1``) or any sequence of integers.

    >>> make_cube(2, 3)
    DyadicCube(j=2, k=(3,))
    """
    if isinstance(k, (int, np.integer)):
        position: Tuple[int, ...] = (int(k),)
    else:
        position = tuple(int(ki) for ki in k)
    if len(position) == 0:
        raise ValueError("A dyadic cube needs at least one coordinate")
    return DyadicCube(int(j), position)


def _check_same_dimension(Q: DyadicCube, R: DyadicCube) -> None:
    if Q.n != R.n:
        raise ValueError(
            f"Cubes live in different dimensions: {Q.n} and {R.n} ({Q}, {R})"
        )


def scaled_distance(Q: DyadicCube, R: DyadicCube) -> float:
    """
    The scale-normalized distance ``1 + |x_Q - x_R| / max(ℓ(Q), ℓ(R))`` between the
    lower-left corners of two cubes.

    Parameters
    ----------
    Q, R : DyadicCube
        Cubes of the same ambient dimension.

    Returns
    -------
    float
        A value ``>= 1``, symmetric in its arguments.

    Raises
    ------
    ValueError
        If the cubes have different dimensions.

    Examples
    --------
    >>> scaled_distance(make_cube(0, 0), make_cube(0, 2))
    3.0
    """
    _check_same_dimension(Q, R)
    edge = max(Q.side, R.side)
    return 1.0 + float(np.linalg.norm(Q.corner - R.corner)) / edge


def contains(Q: DyadicCube, R: DyadicCube) -> bool:
    """
    ``True`` when ``R ⊆ Q`` as half-open boxes, decided with integer shifts.
    """
    _check_same_dimension(Q, R)
    if R.j < Q.j:
        return False
    shift = R.j - Q.j
    return all((kr >> shift) == kq for kr, kq in zip(R.k, Q.k))


class Box(NamedTuple):
    """
    Axis-aligned half-open box ``[lower, upper)``.
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def contains_point(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x < self.upper))

    def intersection(self, other: "Box") -> Optional["Box"]:
        lower = tuple(np.maximum(self.lower, other.lower).tolist())
        upper = tuple(np.minimum(self.upper, other.upper).tolist())
        if any(lo >= up for lo, up in zip(lower, upper)):
            return None
        return Box(lower, upper)

    def intersects(self, other: "Box") -> bool:
        return self.intersection(other) is not None

    @staticmethod
    def of_cube(Q: DyadicCube) -> "Box":
        corner = Q.corner
        return Box(tuple(corner.tolist()), tuple((corner + Q.side).tolist()))


class LatticeWindow(NamedTuple):
    """
    The finite truncation of the dyadic lattice every computation runs over.

    At scale ``j`` the positions ``k`` range over ``[-b_j, b_j)^n`` with
    ``b_j = ceil(2^{j + box})``, so for ``j >= -box`` the window covers the spatial
    box ``[-2^{box}, 2^{box})^n``.
    """

    j_min: int = -3
    j_max: int = 6
    n: int = 1
    box: int = 3

    def index_bound(self, j: int) -> int:
        exponent = j + self.box
        return 1 << exponent if exponent >= 0 else 1

    @property
    def extent(self) -> float:
        """Half-width of the spatial box covered at every scale ``j >= -box``."""
        return math.ldexp(1.0, self.box)

    @property
    def scales(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def cubes(self, j: int) -> List[DyadicCube]:
        if j < self.j_min or j > self.j_max:
            return []
        bound = self.index_bound(j)
        return [
            DyadicCube(j, k)
            for k in itertools.product(range(-bound, bound), repeat=self.n)
        ]

    def all_cubes(self) -> List[DyadicCube]:
        return [Q for j in self.scales for Q in self.cubes(j)]

    def __contains__(self, Q: object) -> bool:
        if not isinstance(Q, DyadicCube) or Q.n != self.n:
            return False
        if Q.j < self.j_min or Q.j > self.j_max:
            return False
        bound = self.index_bound(Q.j)
        return all(-bound <= ki < bound for ki in Q.k)

    def contains_point(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -self.extent) and np.all(x < self.extent))

    def refined(self) -> "LatticeWindow":
        """The same window with one extra, finer scale."""
        return self._replace(j_max=self.j_max + 1)

    def with_dimension(self, n: int) -> "LatticeWindow":
        return self._replace(n=n)

    def to_dict(self) -> Dict[str, int]:
        return {
            "j_min": self.j_min,
            "j_max": self.j_max,
            "n": self.n,
            "box": self.box,
        }

    @staticmethod
    def from_string(text: str, n: int = 1) -> "LatticeWindow":
        """
        Parses ``"j_min:j_max:box"`` as used by the ``--window`` command line option.

        >>> LatticeWindow.from_string("0:3:1")
        LatticeWindow(j_min=0, j_max=3, n=1, box=1)
        """
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"Window {text!r} is not of the form j_min:j_max:box")
        try:
            j_min, j_max, box = (int(part) for part in parts)
        except ValueError:
            raise ValueError(f"Window {text!r} has non-integer fields")
        return check_window(LatticeWindow(j_min, j_max, n, box))


def check_window(window: LatticeWindow) -> LatticeWindow:
    if not isinstance(window, LatticeWindow):
        raise TypeError(f"Expected a LatticeWindow, got {type(window)}")
    if window.j_min > window.j_max:
        raise ValueError(
            f"Window scales are inverted: j_min={window.j_min} > j_max={window.j_max}"
        )
    if window.n < 1:
        raise ValueError(f"Window dimension must be positive, got {window.n}")
    return window


def cubes_to_array(cubes: Sequence[DyadicCube]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stacks scales and positions of ``cubes`` into integer arrays of shapes ``(N,)``
    and ``(N, n)`` for vectorized pairwise computations.
    """
    if len(cubes) == 0:
        return np.zeros(0, dtype=int), np.zeros((0, 1), dtype=int)
    scales = np.array([Q.j for Q in cubes], dtype=int)
    positions = np.array([Q.k for Q in cubes], dtype=int)
    return scales, positions


def pairwise_scaled_distance(
    cubes_a: Sequence[DyadicCube], cubes_b: Sequence[DyadicCube]
) -> np.ndarray:
    """Vectorized :func:`scaled_distance` over all pairs, shape ``(len(a), len(b))``."""
    ja, ka = cubes_to_array(cubes_a)
    jb, kb = cubes_to_array(cubes_b)
    corners_a = np.ldexp(ka.astype(float), -ja[:, None])
    corners_b = np.ldexp(kb.astype(float), -jb[:, None])
    distance = np.linalg.norm(corners_a[:, None, :] - corners_b[None, :, :], axis=-1)
    edge = np.maximum(np.ldexp(1.0, -ja)[:, None], np.ldexp(1.0, -jb)[None, :])
    return 1.0 + distance / edge
