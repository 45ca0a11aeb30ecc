# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from joblib import Parallel, delayed

from ..lattice import Box, DyadicCube, LatticeWindow, cubes_to_array
from ..matweight import MatrixWeight, QuadratureSpec, ReducingFamily
from ..matweight.quadrature import MIDPOINT
from ..utils import cartesian_product, resolve_workers
from .sequences import CoeffSequence, SpaceParams

logger = logging.getLogger(__name__)

ESets = Union[Mapping[DyadicCube, Box], Callable[[DyadicCube], Box]]


class LayerMagnitudes:
    """
    Scalar layer magnitudes ``f_j = Σ_{S ∈ D_j} f_S`` with ``f_S >= 0`` supported in
    the cube ``S``. The factor ``2^{js}`` is already included.

    Subclasses describe how ``f_S`` varies inside ``S`` through two methods: the
    integral ``∫_S f_S^p`` and samples of ``f_S`` on the cells of a leaf cube.
    """

    def __init__(self, n: int, cubes: Sequence[DyadicCube]):
        self.n = n
        self.cubes = sorted(cubes, key=lambda Q: (Q.j, Q.k))

    def cube_integral(self, S: DyadicCube, p: float) -> float:
        raise NotImplementedError

    def leaf_samples(
        self, L: DyadicCube, covering: Sequence[DyadicCube]
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Cell measures of shape ``(N,)`` partitioning ``L`` and the values of each
        covering ``f_S`` on those cells, shape ``(len(covering), N)``.
        """
        raise NotImplementedError

    def __len__(self) -> int:
        return len(self.cubes)


class ConstantLayers(LayerMagnitudes):
    """Magnitudes constant on each support cube."""

    def __init__(self, n: int, values: Mapping[DyadicCube, float]):
        super().__init__(n, list(values))
        self.values = dict(values)

    def cube_integral(self, S: DyadicCube, p: float) -> float:
        return S.volume * self.values[S] ** p

    def leaf_samples(
        self, L: DyadicCube, covering: Sequence[DyadicCube]
    ) -> Tuple[np.ndarray, np.ndarray]:
        values = np.array([[self.values[S]] for S in covering], dtype=float)
        return np.array([L.volume]), values


class SampledLayers(LayerMagnitudes):
    """
    Magnitudes constant on the scale ``j_S + r`` subcells of each support cube,
    stored in C order over the subcell offsets.
    """

    def __init__(self, n: int, r: int, values: Mapping[DyadicCube, np.ndarray]):
        super().__init__(n, list(values))
        self.r = r
        self.values = {S: np.asarray(v, dtype=float) for S, v in values.items()}
        self._offsets = cartesian_product(*([np.arange(1 << r)] * n)).astype(int)

    def cube_integral(self, S: DyadicCube, p: float) -> float:
        cell = S.volume / (1 << (self.r * self.n))
        return float(cell * np.sum(self.values[S] ** p))

    def leaf_samples(
        self, L: DyadicCube, covering: Sequence[DyadicCube]
    ) -> Tuple[np.ndarray, np.ndarray]:
        width = 1 << self.r
        cells = np.asarray(L.k, dtype=int)[None, :] * width + self._offsets
        weights = np.full(len(cells), L.volume / (1 << (self.r * self.n)))
        shape = (width,) * self.n
        values = np.empty((len(covering), len(cells)))
        for row, S in enumerate(covering):
            local = (cells >> (L.j - S.j)) - np.asarray(S.k, dtype=int)[None, :] * width
            values[row] = self.values[S][np.ravel_multi_index(tuple(local.T), shape)]
        return weights, values


class BoxLayers(LayerMagnitudes):
    """Magnitudes constant on a sub-box ``E_S`` of each support cube and zero off it."""

    def __init__(
        self, n: int, boxes: Mapping[DyadicCube, Box], values: Mapping[DyadicCube, float]
    ):
        super().__init__(n, list(values))
        self.boxes = dict(boxes)
        self.values = dict(values)

    def cube_integral(self, S: DyadicCube, p: float) -> float:
        return self.boxes[S].volume * self.values[S] ** p

    def leaf_samples(
        self, L: DyadicCube, covering: Sequence[DyadicCube]
    ) -> Tuple[np.ndarray, np.ndarray]:
        leaf = Box.of_cube(L)
        axes = []
        for axis in range(self.n):
            lo, up = leaf.lower[axis], leaf.upper[axis]
            breaks = {lo, up}
            for S in covering:
                E = self.boxes[S]
                breaks.update(min(max(b, lo), up) for b in (E.lower[axis], E.upper[axis]))
            axes.append(np.array(sorted(breaks)))
        lower = cartesian_product(*[a[:-1] for a in axes])
        upper = cartesian_product(*[a[1:] for a in axes])
        weights = np.prod(upper - lower, axis=1)
        middle = (lower + upper) / 2
        values = np.zeros((len(covering), len(weights)))
        for row, S in enumerate(covering):
            E = self.boxes[S]
            inside = np.all((middle >= E.lower) & (middle < E.upper), axis=1)
            values[row, inside] = self.values[S]
        return weights, values


class NormReport(NamedTuple):
    """
    Breakdown of a sequence norm.

    ``per_cube`` lists ``(P, value)`` for every candidate ``P``; ``P = None`` stands
    for the whole window. ``best_cube`` attains ``value``.
    """

    value: float
    best_cube: Optional[DyadicCube]
    per_cube: List[Tuple[Optional[DyadicCube], float]]

    def to_dict(self) -> Dict[str, Any]:
        def label(P: Optional[DyadicCube]) -> Any:
            return "window" if P is None else P.to_dict()

        return {
            "value": self.value,
            "best_cube": label(self.best_cube),
            "per_cube": [{"cube": label(P), "value": v} for P, v in self.per_cube],
        }


class _NormEngine:
    """Precomputed integrals and leaf partition shared by every candidate ``P``."""

    def __init__(self, layers: LayerMagnitudes, params: SpaceParams):
        self.layers = layers
        self.is_b = params.is_b
        self.p = params.p
        self.q = params.q
        self.support = layers.cubes
        self.scales, self.positions = cubes_to_array(self.support)
        if self.is_b:
            self.integrals = np.array(
                [layers.cube_integral(S, self.p) for S in self.support]
            )
        else:
            self._build_leaves()

    def _build_leaves(self) -> None:
        support = set(self.support)
        coarsest = min(S.j for S in self.support)
        ancestors = set()
        for S in self.support:
            for j in range(S.j - 1, coarsest - 1, -1):
                ancestors.add(S.ancestor(j))
        stack = [
            S
            for S in self.support
            if not any(S.ancestor(j) in support for j in range(coarsest, S.j))
        ]
        leaves = []
        while stack:
            C = stack.pop()
            if C in ancestors:
                stack.extend(C.children())
            else:
                leaves.append(C)
        leaves.sort(key=lambda Q: (Q.j, Q.k))
        self.leaves = leaves
        self.leaf_scales, self.leaf_positions = cubes_to_array(leaves)
        self.leaf_weights = []
        self.leaf_values = []
        self.leaf_row_scales = []
        for L in leaves:
            covering = [
                L.ancestor(j) for j in range(coarsest, L.j + 1) if L.ancestor(j) in support
            ]
            weights, values = self.layers.leaf_samples(L, covering)
            self.leaf_weights.append(weights)
            self.leaf_values.append(values)
            self.leaf_row_scales.append(np.array([S.j for S in covering]))

    @staticmethod
    def _inside(
        scales: np.ndarray, positions: np.ndarray, P: Optional[DyadicCube], j_P: int
    ) -> np.ndarray:
        mask = scales >= j_P
        if P is not None:
            shift = np.where(mask, scales - P.j, 0)
            mask &= np.all(
                (positions >> shift[:, None]) == np.asarray(P.k)[None, :], axis=1
            )
        return mask

    def inner(self, P: Optional[DyadicCube], j_P: int) -> float:
        """The unnormalized B or F norm of the layers over ``P`` (or the window)."""
        if self.is_b:
            return self._inner_b(P, j_P)
        return self._inner_f(P, j_P)

    def _inner_b(self, P: Optional[DyadicCube], j_P: int) -> float:
        mask = self._inside(self.scales, self.positions, P, j_P)
        if not np.any(mask):
            return 0.0
        scales = self.scales[mask]
        integrals = self.integrals[mask]
        per_scale = np.array(
            [integrals[scales == j].sum() for j in np.unique(scales)]
        ) ** (1.0 / self.p)
        if math.isinf(self.q):
            return float(per_scale.max())
        return float(np.sum(per_scale ** self.q) ** (1.0 / self.q))

    def _inner_f(self, P: Optional[DyadicCube], j_P: int) -> float:
        mask = self._inside(self.leaf_scales, self.leaf_positions, P, j_P)
        total = 0.0
        for index in np.flatnonzero(mask):
            rows = self.leaf_row_scales[index] >= j_P
            values = self.leaf_values[index][rows]
            if len(values) == 0:
                continue
            if math.isinf(self.q):
                pointwise = values.max(axis=0) ** self.p
            else:
                pointwise = np.sum(values ** self.q, axis=0) ** (self.p / self.q)
            total += float(self.leaf_weights[index] @ pointwise)
        return total ** (1.0 / self.p)


def _candidates(
    support: Sequence[DyadicCube], window: LatticeWindow
) -> Tuple[List[DyadicCube], int]:
    floor = min(window.j_min, min(S.j for S in support))
    candidates = set()
    for S in support:
        lowest = window.j_min if S.j >= window.j_min else S.j
        for j in range(S.j, lowest - 1, -1):
            candidates.add(S.ancestor(j))
    return sorted(candidates, key=lambda Q: (-Q.j, Q.k)), floor


def _candidate_value(
    engine: _NormEngine, upsilon: Any, P: DyadicCube
) -> float:
    return engine.inner(P, P.j) / upsilon(P)


def norm_breakdown(
    layers: LayerMagnitudes,
    params: SpaceParams,
    window: Optional[LatticeWindow] = None,
    workers: Optional[int] = None,
) -> NormReport:
    """
    The ``LȦ^υ_{p,q}`` norm ``sup_P υ(P)^{-1} ‖{f_j}_{j >= j_P}‖`` with the value of
    every candidate ``P``.

    The candidates are every support cube with its ancestors down to
    ``window.j_min`` and one extra candidate covering the whole window, normalized by
    the largest ``υ`` among the coarsest window cubes. Other cubes contribute no more
    than one of these. Ties go to the finest candidate.

    Parameters
    ----------
    layers : LayerMagnitudes
        The scalar layers, including the ``2^{js}`` factors.
    params : SpaceParams
        Family, ``p``, ``q`` and ``υ``; ``s`` is not used here.
    window : Optional[LatticeWindow]
        Defaults to ``LatticeWindow(n=params.n)``.
    workers : Optional[int]
        Parallel jobs over the candidates.

    Returns
    -------
    NormReport
    """
    window = LatticeWindow(n=params.n) if window is None else window
    if len(layers) == 0:
        return NormReport(value=0.0, best_cube=None, per_cube=[])
    engine = _NormEngine(layers, params)
    candidates, floor = _candidates(layers.cubes, window)
    upsilon = params.growth
    values = Parallel(n_jobs=resolve_workers(workers))(
        delayed(_candidate_value)(engine, upsilon, P) for P in candidates
    )
    coarsest = window.cubes(window.j_min)
    whole = engine.inner(None, floor) / max(upsilon(Q) for Q in coarsest)
    per_cube: List[Tuple[Optional[DyadicCube], float]] = list(zip(candidates, values))
    per_cube.append((None, whole))
    best = int(np.argmax([v for _, v in per_cube]))
    best_cube, value = per_cube[best]
    logger.debug(f"Norm {value:.6g} attained at {best_cube} among {len(per_cube)}")
    return NormReport(value=float(value), best_cube=best_cube, per_cube=per_cube)


def la_norm(
    layers: LayerMagnitudes,
    params: SpaceParams,
    P: Optional[DyadicCube] = None,
    window: Optional[LatticeWindow] = None,
    workers: Optional[int] = None,
) -> float:
    """
    The ``LȦ^υ_{p,q}`` quantity of ``layers``.

    With ``P`` given this is ``υ(P)^{-1}`` times
    ``(Σ_{j >= j_P} ‖f_j 1_P‖_p^q)^{1/q}`` for family ``B`` or
    ``‖(Σ_{j >= j_P} |f_j|^q)^{1/q} 1_P‖_p`` for family ``F``, with sums replaced by
    maxima when ``q = ∞``. Without ``P`` it is the supremum over the window, see
    :func:`norm_breakdown`.

    Integrals are exact sums over cells on which the layers are constant.

    Examples
    --------
    >>> from .sequences import make_space_params
    >>> layers = ConstantLayers(1, {DyadicCube(0, (0,)): 1.0, DyadicCube(1, (0,)): 2 ** 0.5})
    >>> round(la_norm(layers, make_space_params(p=1.0, q=1.0)), 5)
    1.70711
    """
    if P is None:
        return norm_breakdown(layers, params, window, workers).value
    if len(layers) == 0:
        return 0.0
    return _NormEngine(layers, params).inner(P, P.j) / params.growth(P)


def _check_sequence(t: CoeffSequence, params: SpaceParams) -> None:
    if t.n != params.n or t.m != params.m:
        raise ValueError(
            f"Sequence shape (n={t.n}, m={t.m}) does not match the space "
            f"(n={params.n}, m={params.m})"
        )


def _smoothness(S: DyadicCube, s: float) -> float:
    return 2.0 ** (S.j * s)


def unweighted_layers(t: CoeffSequence, params: SpaceParams) -> ConstantLayers:
    _check_sequence(t, params)
    return ConstantLayers(
        t.n,
        {
            S: _smoothness(S, params.s) * float(np.linalg.norm(v)) / math.sqrt(S.volume)
            for S, v in t.items()
        },
    )


def weighted_layers(
    t: CoeffSequence,
    W: MatrixWeight,
    params: SpaceParams,
    quad: QuadratureSpec = QuadratureSpec(),
) -> LayerMagnitudes:
    """
    Layers ``2^{js}|W^{1/p} t_j|``. ``W^{1/p}`` is frozen at the midpoints of the
    scale ``j_S + r`` subcells of each support cube, or taken exactly for constant
    weights.
    """
    _check_sequence(t, params)
    if (W.n, W.m) != (t.n, t.m):
        raise ValueError(
            f"Weight {W.label} has (n={W.n}, m={W.m}), sequence has "
            f"(n={t.n}, m={t.m})"
        )
    exponent = 1.0 / params.p
    if W.is_constant:
        root = W.power(np.zeros((1, W.n)), exponent)[0]
        return ConstantLayers(
            t.n,
            {
                S: _smoothness(S, params.s)
                * float(np.linalg.norm(root @ v))
                / math.sqrt(S.volume)
                for S, v in t.items()
            },
        )
    if quad.rule != MIDPOINT:
        raise ValueError("Weighted layers are sampled with the midpoint rule only")
    values = {}
    for S, v in t.items():
        points, _ = quad.cube_nodes(S)
        roots = W.power(points, exponent)
        magnitudes = np.linalg.norm(np.einsum("nij,j->ni", roots, v), axis=1)
        values[S] = _smoothness(S, params.s) * magnitudes / math.sqrt(S.volume)
    return SampledLayers(t.n, quad.r, values)


def averaging_layers(
    t: CoeffSequence, family: ReducingFamily, params: SpaceParams
) -> ConstantLayers:
    _check_sequence(t, params)
    return ConstantLayers(
        t.n,
        {
            S: _smoothness(S, params.s)
            * float(np.linalg.norm(family.get(S) @ v))
            / math.sqrt(S.volume)
            for S, v in t.items()
        },
    )


def _e_set(e_sets: ESets, S: DyadicCube) -> Box:
    if callable(e_sets):
        return e_sets(S)
    try:
        return e_sets[S]
    except KeyError:
        raise ValueError(f"No E-set given for {S}")


def eq_set_layers(
    t: CoeffSequence, e_sets: ESets, params: SpaceParams
) -> BoxLayers:
    _check_sequence(t, params)
    boxes = {}
    values = {}
    for S, v in t.items():
        E = _e_set(e_sets, S)
        cube = Box.of_cube(S)
        if E.volume <= 0:
            raise ValueError(f"E-set {E} of {S} has zero measure")
        if np.any(np.less(E.lower, cube.lower)) or np.any(
            np.greater(E.upper, cube.upper)
        ):
            raise ValueError(f"E-set {E} is not contained in {S}")
        boxes[S] = E
        values[S] = _smoothness(S, params.s) * float(np.linalg.norm(v)) / math.sqrt(
            E.volume
        )
    return BoxLayers(t.n, boxes, values)


def unweighted_norm(
    t: CoeffSequence,
    params: SpaceParams,
    window: Optional[LatticeWindow] = None,
    workers: Optional[int] = None,
) -> float:
    """The norm of ``t`` in ``ḃ^{s,υ}_{p,q}`` or ``ḟ^{s,υ}_{p,q}`` without a weight."""
    return la_norm(unweighted_layers(t, params), params, window=window, workers=workers)


def weighted_norm(
    t: CoeffSequence,
    W: MatrixWeight,
    params: SpaceParams,
    window: Optional[LatticeWindow] = None,
    quad: QuadratureSpec = QuadratureSpec(),
    workers: Optional[int] = None,
) -> float:
    """
    The norm of ``t`` in the matrix-weighted space ``ȧ^{s,υ}_{p,q}(W)``.

    Parameters
    ----------
    t : CoeffSequence
        Finitely supported coefficients.
    W : MatrixWeight
        The weight; its size must match ``t``.
    params : SpaceParams
        The space.
    window : Optional[LatticeWindow]
        Sup window for ``P``.
    quad : QuadratureSpec
        Midpoint level ``r`` at which ``W^{1/p}`` is sampled inside each cube.
    workers : Optional[int]
        Parallel jobs.

    Returns
    -------
    float
        The norm; ``0`` for the empty sequence.

    Raises
    ------
    ValueError
        If the shapes disagree or ``W`` is singular at a sampling node.
    """
    layers = weighted_layers(t, W, params, quad)
    return la_norm(layers, params, window=window, workers=workers)


def averaging_norm(
    t: CoeffSequence,
    family: ReducingFamily,
    params: SpaceParams,
    window: Optional[LatticeWindow] = None,
    workers: Optional[int] = None,
) -> float:
    """
    The averaging norm with ``W^{1/p}(x)`` replaced by the reducing operator ``A_Q``
    on each cube.

    Raises
    ------
    ValueError
        If ``family`` has no operator for a support cube.
    """
    layers = averaging_layers(t, family, params)
    return la_norm(layers, params, window=window, workers=workers)


def eq_set_norm(
    t: CoeffSequence,
    e_sets: ESets,
    params: SpaceParams,
    window: Optional[LatticeWindow] = None,
    workers: Optional[int] = None,
) -> float:
    """
    The unweighted norm with ``|E_Q|^{-1/2} 1_{E_Q}`` in place of ``|Q|^{-1/2} 1_Q``.

    ``e_sets`` maps each support cube to a sub-box, as a mapping or a callable such
    as :func:`dms.lattice.middle_band_of`.

    Raises
    ------
    ValueError
        If an E-set has zero measure, leaves its cube or is missing.
    """
    layers = eq_set_layers(t, e_sets, params)
    return la_norm(layers, params, window=window, workers=workers)
