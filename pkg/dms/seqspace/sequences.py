# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import math
from typing import (
    Any,
    Dict,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from sklearn.utils import check_random_state

from ..growth import GrowthFunction, growth_class_diagnostics, unit_growth
from ..lattice import DyadicCube, LatticeWindow

B_FAMILY = "B"
F_FAMILY = "F"


class CoeffSequence:
    """
    A finitely supported sequence ``{t_Q}`` of complex ``m``-vectors indexed by dyadic
    cubes in ``R^n``.

    Parameters
    ----------
    entries : Mapping[DyadicCube, array-like]
        Coefficient per cube; scalars are accepted when ``m = 1``.
    n : int
        Dimension of the cubes.
    m : int
        Length of the coefficient vectors.
    """

    def __init__(self, entries: Mapping[DyadicCube, Any], n: int, m: int = 1):
        self.n = n
        self.m = m
        self._entries: Dict[DyadicCube, np.ndarray] = {}
        for Q, value in entries.items():
            if Q.n != n:
                raise ValueError(f"Cube {Q} does not live in R^{n}")
            vector = np.atleast_1d(np.asarray(value, dtype=complex)).copy()
            if vector.shape != (m,):
                raise ValueError(
                    f"Coefficient on {Q} has shape {vector.shape}, expected ({m},)"
                )
            vector.setflags(write=False)
            self._entries[Q] = vector

    @staticmethod
    def empty(n: int, m: int = 1) -> "CoeffSequence":
        return CoeffSequence({}, n, m)

    @property
    def support(self) -> List[DyadicCube]:
        return sorted(self._entries, key=lambda Q: (Q.j, Q.k))

    def scales(self) -> List[int]:
        return sorted({Q.j for Q in self._entries})

    def at_scale(self, j: int) -> Dict[DyadicCube, np.ndarray]:
        return {Q: value for Q, value in self._entries.items() if Q.j == j}

    def get(self, Q: DyadicCube) -> np.ndarray:
        return self._entries.get(Q, np.zeros(self.m, dtype=complex))

    def items(self) -> Iterator[Tuple[DyadicCube, np.ndarray]]:
        return iter(self._entries.items())

    def __contains__(self, Q: object) -> bool:
        return Q in self._entries

    def __getitem__(self, Q: DyadicCube) -> np.ndarray:
        return self._entries[Q]

    def __len__(self) -> int:
        return len(self._entries)

    def _check_compatible(self, other: "CoeffSequence") -> None:
        if (self.n, self.m) != (other.n, other.m):
            raise ValueError(
                f"Sequences differ in shape: (n={self.n}, m={self.m}) and "
                f"(n={other.n}, m={other.m})"
            )

    def __add__(self, other: "CoeffSequence") -> "CoeffSequence":
        self._check_compatible(other)
        entries = dict(self._entries)
        for Q, value in other.items():
            entries[Q] = entries[Q] + value if Q in entries else value
        return CoeffSequence(entries, self.n, self.m)

    def __sub__(self, other: "CoeffSequence") -> "CoeffSequence":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "CoeffSequence":
        return CoeffSequence(
            {Q: scalar * value for Q, value in self._entries.items()}, self.n, self.m
        )

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max((float(np.abs(v).max()) for v in self._entries.values()), default=0.0)

    def to_json(self) -> List[Dict[str, Any]]:
        """Records ``{"cube": {"j", "k"}, "re": [...], "im": [...]}`` sorted by cube."""
        return [
            {
                "cube": Q.to_dict(),
                "re": self._entries[Q].real.tolist(),
                "im": self._entries[Q].imag.tolist(),
            }
            for Q in self.support
        ]

    @staticmethod
    def from_json(
        records: Sequence[Mapping[str, Any]], n: int, m: Optional[int] = None
    ) -> "CoeffSequence":
        entries = {}
        for record in records:
            Q = DyadicCube.from_dict(record["cube"])
            re = np.asarray(record["re"], dtype=float)
            im = np.asarray(record.get("im", np.zeros_like(re)), dtype=float)
            entries[Q] = re + 1j * im
        if m is None:
            m = len(next(iter(entries.values()))) if entries else 1
        return CoeffSequence(entries, n, m)

    def __repr__(self) -> str:
        return f"CoeffSequence(n={self.n}, m={self.m}, support={len(self)})"


class SpaceParams(NamedTuple):
    """
    Parameters of ``ḃ^{s,υ}_{p,q}`` (``family="B"``) or ``ḟ^{s,υ}_{p,q}``
    (``family="F"``). ``q`` may be ``math.inf``.
    """

    family: str = B_FAMILY
    s: float = 0.0
    p: float = 2.0
    q: float = 2.0
    growth: GrowthFunction = unit_growth(1)
    n: int = 1
    m: int = 1

    @property
    def is_b(self) -> bool:
        return self.family == B_FAMILY

    def to_dict(self) -> Dict[str, Any]:
        delta1, delta2, omega = self.growth.growth_class
        return {
            "family": self.family,
            "s": self.s,
            "p": self.p,
            "q": "inf" if math.isinf(self.q) else self.q,
            "growth": {
                "label": self.growth.label,
                "delta1": delta1,
                "delta2": delta2,
                "omega": omega,
            },
            "n": self.n,
            "m": self.m,
        }


def make_space_params(
    family: str = B_FAMILY,
    s: float = 0.0,
    p: float = 2.0,
    q: float = 2.0,
    growth: Optional[GrowthFunction] = None,
    n: int = 1,
    m: int = 1,
) -> SpaceParams:
    """
    Validated :class:`SpaceParams`; ``growth`` defaults to ``υ ≡ 1``.

    Raises
    ------
    ValueError
        If ``p`` or ``q`` is not positive, the family is unknown, the growth function
        lives in another dimension or its class is outside the admissible range.
    """
    family = family.upper()
    growth = unit_growth(n) if growth is None else growth
    params = SpaceParams(family, float(s), float(p), float(q), growth, n, m)
    check_space_params(params)
    return params


def space_params_diagnostics(params: SpaceParams) -> List[str]:
    messages = []
    if params.family not in (B_FAMILY, F_FAMILY):
        messages.append(f"family must be 'B' or 'F', got {params.family!r}")
    if not params.p > 0 or math.isinf(params.p):
        messages.append(f"p must lie in (0, inf), got {params.p}")
    if not params.q > 0:
        messages.append(f"q must lie in (0, inf], got {params.q}")
    if params.growth.n != params.n:
        messages.append(
            f"growth function lives in dimension {params.growth.n}, not {params.n}"
        )
    messages.extend(growth_class_diagnostics(*params.growth.growth_class, params.n))
    return messages


def check_space_params(params: SpaceParams) -> SpaceParams:
    messages = space_params_diagnostics(params)
    if messages:
        raise ValueError("; ".join(messages))
    return params


class LayerFunction(NamedTuple):
    """
    The piecewise constant layer ``t_j = Σ_{Q ∈ D_j} |Q|^{-1/2} 1_Q t_Q``.
    """

    j: int
    n: int
    m: int
    cells: Dict[DyadicCube, np.ndarray]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at ``points`` of shape ``(N, n)``, returned as ``(N, m)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        positions = np.floor(np.ldexp(points, self.j)).astype(int)
        out = np.zeros((len(points), self.m), dtype=complex)
        for row, k in enumerate(positions):
            value = self.cells.get(DyadicCube(self.j, tuple(k.tolist())))
            if value is not None:
                out[row] = value
        return out


def layer(t: CoeffSequence, j: int) -> LayerFunction:
    """
    Assembles the scale-``j`` layer of ``t``; zero when ``t`` has no scale-``j``
    entries.
    """
    return LayerFunction(
        j=j,
        n=t.n,
        m=t.m,
        cells={Q: value / math.sqrt(Q.volume) for Q, value in t.at_scale(j).items()},
    )


def random_sequence(
    window: LatticeWindow,
    support_size: int,
    m: int = 1,
    random_state: Any = None,
    cubes: Optional[Sequence[DyadicCube]] = None,
) -> CoeffSequence:
    """
    Complex Gaussian coefficients on ``support_size`` cubes drawn uniformly without
    replacement from ``cubes`` (all window cubes by default).
    """
    rng = check_random_state(random_state)
    pool = list(window.all_cubes() if cubes is None else cubes)
    if support_size > len(pool):
        raise ValueError(
            f"Support size {support_size} exceeds the {len(pool)} available cubes"
        )
    chosen = rng.choice(len(pool), size=support_size, replace=False)
    values = rng.standard_normal((support_size, m)) + 1j * rng.standard_normal(
        (support_size, m)
    )
    return CoeffSequence(
        {pool[index]: values[row] for row, index in enumerate(chosen)}, window.n, m
    )


def random_ensemble(
    window: LatticeWindow,
    size: int,
    support_size: int,
    m: int = 1,
    random_state: Any = None,
    cubes: Optional[Sequence[DyadicCube]] = None,
) -> List[CoeffSequence]:
    """``size`` independent :func:`random_sequence` draws from one generator."""
    rng = check_random_state(random_state)
    return [
        random_sequence(window, support_size, m, rng, cubes) for _ in range(size)
    ]
