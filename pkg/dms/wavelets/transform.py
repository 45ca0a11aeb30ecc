# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import itertools
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from joblib import Memory, Parallel, delayed

from ..lattice import DyadicCube, LatticeWindow
from ..matweight import MatrixWeight, QuadratureSpec
from ..seqspace import CoeffSequence, SpaceParams, unweighted_norm, weighted_norm
from ..utils import cartesian_product, multi_indices, resolve_workers
from .daubechies import (
    K0,
    CascadeSamples,
    FilterPair,
    cascade_samples,
    daubechies_filter,
    find_k0,
)

logger = logging.getLogger(__name__)

CACHE_VERSION = 1

Lambda = Tuple[int, ...]


def wavelet_types(n: int) -> List[Lambda]:
    """``Λ_n = {0, 1}^n \\ {0}`` in lexicographic order."""
    return [lam for lam in itertools.product((0, 1), repeat=n) if any(lam)]


def _build_tables(k: int, levels: int, version: int) -> Tuple[FilterPair, CascadeSamples]:
    filters = daubechies_filter(k)
    return filters, cascade_samples(filters, levels)


class WaveletSystem:
    """
    Tensor Daubechies system ``θ^{(λ)}_Q(x) = 2^{jn/2} Π_i φ^{(λ_i)}(2^j x_i - k_i)``
    with ``φ^{(0)} = φ`` and ``φ^{(1)} = ψ``.

    Parameters
    ----------
    k : int
        Number of vanishing moments; ``k = 1`` is the Haar system.
    levels : int
        Cascade depth, in ``[4, 14]``.
    n : int
        Dimension.
    cache_dir : Optional[Union[str, Path]]
        Directory of the on-disk cache of filters and cascade tables; no caching
        when ``None``.

    Attributes
    ----------
    filters : FilterPair
    samples : CascadeSamples
    k0 : K0
        The shift ``k₀`` with ``φ(-k₀) ≠ 0`` and that value.
    """

    def __init__(
        self,
        k: int,
        levels: int = 10,
        n: int = 1,
        cache_dir: Optional[Union[str, Path]] = None,
    ):
        memory = Memory(location=None if cache_dir is None else str(cache_dir), verbose=0)
        self.filters, self.samples = memory.cache(_build_tables)(k, levels, CACHE_VERSION)
        self.k = k
        self.levels = levels
        self.n = n
        self.k0: K0 = find_k0(self.samples)
        logger.info(f"Wavelet system k={k}, levels={levels}, n={n}, k0={self.k0.k0}")

    @property
    def support_radius(self) -> int:
        """``φ`` and ``ψ`` vanish outside ``[0, support_radius]``."""
        return 2 * self.k - 1

    @property
    def band(self) -> int:
        """Trace band ``M``: slices with ``|i| > M`` never meet the support."""
        return 2 * self.k - 1

    @property
    def types(self) -> List[Lambda]:
        return wavelet_types(self.n)

    def with_dimension(self, n: int) -> "WaveletSystem":
        other = object.__new__(WaveletSystem)
        other.__dict__.update(self.__dict__)
        other.n = n
        return other

    def factor_samples(self, bit: int, depth: int) -> np.ndarray:
        if not (1 if bit else 0) <= depth <= self.levels:
            raise ValueError(
                f"Depth {depth} is outside the cascade range of this system "
                f"(levels={self.levels})"
            )
        return self.samples.psi[depth] if bit else self.samples.phi[depth]

    def factor_matrix(
        self,
        bit: int,
        j: int,
        positions: np.ndarray,
        resolution: int,
        grid_index: np.ndarray,
    ) -> np.ndarray:
        """
        ``2^{j/2} φ^{(bit)}(2^j x - k)`` at ``x = grid_index / 2^resolution`` for each
        position ``k``, shape ``(len(positions), len(grid_index))``.
        """
        depth = resolution - j
        samples = self.factor_samples(bit, depth)
        index = grid_index[None, :] - np.asarray(positions)[:, None] * (1 << depth)
        valid = (index >= 0) & (index < len(samples))
        out = np.zeros(index.shape)
        out[valid] = samples[index[valid]]
        return 2.0 ** (j / 2) * out

    def factor(self, bit: int, t: np.ndarray) -> np.ndarray:
        """``φ`` (``bit = 0``) or ``ψ`` at arbitrary points from the finest samples."""
        t = np.asarray(t, dtype=float)
        values = self.factor_samples(bit, self.levels)
        scale = float(1 << self.levels)
        if self.k == 1:
            index = np.floor(t * scale).astype(int)
            valid = (index >= 0) & (index < len(values) - 1)
            out = np.zeros(t.shape)
            out[valid] = values[index[valid]]
            return out
        return np.interp(t, self.samples.grid(self.levels), values, left=0.0, right=0.0)

    def evaluate(self, lam: Lambda, Q: DyadicCube, points: np.ndarray) -> np.ndarray:
        """``θ^{(λ)}_Q`` at ``points`` of shape ``(N, n)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(points), 2.0 ** (Q.j * Q.n / 2))
        for axis, bit in enumerate(lam):
            out *= self.factor(bit, np.ldexp(points[:, axis], Q.j) - Q.k[axis])
        return out

    def __repr__(self) -> str:
        return f"WaveletSystem(k={self.k}, levels={self.levels}, n={self.n})"


class SampledFunction(NamedTuple):
    """
    An ``m``-vector function sampled at ``x = (lower + i) / 2^resolution`` on a
    tensor grid; ``values`` has shape ``(N_1, ..., N_n, m)``.
    """

    resolution: int
    lower: Tuple[int, ...]
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    def axes(self) -> List[np.ndarray]:
        return [
            lo + np.arange(size) for lo, size in zip(self.lower, self.values.shape[:-1])
        ]

    def points(self) -> np.ndarray:
        return np.ldexp(cartesian_product(*self.axes()).astype(float), -self.resolution)

    @staticmethod
    def from_callable(
        f: Callable[[np.ndarray], np.ndarray],
        lower: Sequence[float],
        upper: Sequence[float],
        resolution: int,
        m: int = 1,
    ) -> "SampledFunction":
        """Samples ``f`` (points ``(N, n)`` to ``(N,)`` or ``(N, m)``) on a box."""
        first = [int(math.ceil(math.ldexp(lo, resolution))) for lo in lower]
        last = [int(math.ceil(math.ldexp(up, resolution))) for up in upper]
        shape = tuple(b - a for a, b in zip(first, last))
        grid = SampledFunction(resolution, tuple(first), np.zeros(shape + (m,)))
        values = np.asarray(f(grid.points()))
        return grid._replace(values=values.reshape(shape + (m,)))


class WaveletCoeffs:
    """
    Coefficients ``(λ, Q) -> m``-vector of a wavelet expansion.

    ``λ`` ranges over ``{0, 1}^n``; the zero type marks scaling functions.
    """

    def __init__(
        self,
        entries: Mapping[Tuple[Lambda, DyadicCube], Any],
        n: int,
        m: int = 1,
        k: Optional[int] = None,
    ):
        self.n = n
        self.m = m
        self.k = k
        self._entries: Dict[Tuple[Lambda, DyadicCube], np.ndarray] = {}
        for (lam, Q), value in entries.items():
            lam = tuple(int(b) for b in lam)
            if len(lam) != n or Q.n != n:
                raise ValueError(f"Entry ({lam}, {Q}) does not live in R^{n}")
            vector = np.atleast_1d(np.asarray(value, dtype=complex))
            if vector.shape != (m,):
                raise ValueError(f"Coefficient shape {vector.shape}, expected ({m},)")
            self._entries[(lam, Q)] = vector

    def items(self) -> Iterator[Tuple[Tuple[Lambda, DyadicCube], np.ndarray]]:
        return iter(self._entries.items())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: object) -> bool:
        return key in self._entries

    def get(self, lam: Lambda, Q: DyadicCube) -> np.ndarray:
        return self._entries.get((tuple(lam), Q), np.zeros(self.m, dtype=complex))

    def types(self) -> List[Lambda]:
        return sorted({lam for lam, _ in self._entries})

    def component(self, lam: Lambda) -> CoeffSequence:
        lam = tuple(lam)
        return CoeffSequence(
            {Q: v for (mu, Q), v in self._entries.items() if mu == lam}, self.n, self.m
        )

    def __add__(self, other: "WaveletCoeffs") -> "WaveletCoeffs":
        entries = dict(self._entries)
        for key, value in other.items():
            entries[key] = entries[key] + value if key in entries else value
        return WaveletCoeffs(entries, self.n, self.m, self.k)

    def __mul__(self, scalar: complex) -> "WaveletCoeffs":
        return WaveletCoeffs(
            {key: scalar * v for key, v in self._entries.items()}, self.n, self.m, self.k
        )

    __rmul__ = __mul__

    def __sub__(self, other: "WaveletCoeffs") -> "WaveletCoeffs":
        return self + (-1.0) * other

    def max_abs(self) -> float:
        return max((float(np.abs(v).max()) for v in self._entries.values()), default=0.0)

    def to_json(self) -> List[Dict[str, Any]]:
        """The sequence records of :meth:`CoeffSequence.to_json` plus ``"lambda"``."""
        ordered = sorted(self._entries, key=lambda key: (key[0], key[1].j, key[1].k))
        return [
            {
                "lambda": list(lam),
                "cube": Q.to_dict(),
                "re": self._entries[(lam, Q)].real.tolist(),
                "im": self._entries[(lam, Q)].imag.tolist(),
            }
            for lam, Q in ordered
        ]

    @staticmethod
    def from_json(
        records: Sequence[Mapping[str, Any]], n: int, m: int = 1, k: Optional[int] = None
    ) -> "WaveletCoeffs":
        entries = {}
        for record in records:
            Q = DyadicCube.from_dict(record["cube"])
            re = np.asarray(record["re"], dtype=float)
            im = np.asarray(record.get("im", np.zeros_like(re)), dtype=float)
            entries[(tuple(record["lambda"]), Q)] = re + 1j * im
        return WaveletCoeffs(entries, n, m, k)

    def __repr__(self) -> str:
        return f"WaveletCoeffs(n={self.n}, m={self.m}, k={self.k}, entries={len(self)})"


def _contract(values: np.ndarray, matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Applies ``matrices[i]`` along axis ``i`` of ``values``."""
    for axis, matrix in enumerate(matrices):
        values = np.moveaxis(np.tensordot(matrix, values, axes=([1], [axis])), 0, axis)
    return values


def _analyze_block(
    system: WaveletSystem,
    f: SampledFunction,
    j: int,
    lam: Lambda,
    positions: np.ndarray,
) -> Dict[Tuple[Lambda, DyadicCube], np.ndarray]:
    axes = f.axes()
    matrices = [
        system.factor_matrix(bit, j, positions, f.resolution, axes[axis])
        for axis, bit in enumerate(lam)
    ]
    block = _contract(f.values, matrices) * math.ldexp(1.0, -f.resolution * f.n)
    out = {}
    for index in np.ndindex(block.shape[:-1]):
        out[(lam, DyadicCube(j, tuple(int(positions[i]) for i in index)))] = block[index]
    return out


def check_resolution(
    system: WaveletSystem, window: LatticeWindow, resolution: int
) -> None:
    if resolution < window.j_max + 2:
        raise ValueError(
            f"Sampling resolution {resolution} is too coarse for scale "
            f"{window.j_max}; need at least {window.j_max + 2}"
        )
    if resolution - window.j_min > system.levels:
        raise ValueError(
            f"Sampling resolution {resolution} needs cascade depth "
            f"{resolution - window.j_min} > levels={system.levels}"
        )


def analyze(
    f: SampledFunction,
    system: WaveletSystem,
    window: LatticeWindow,
    types: Optional[Sequence[Lambda]] = None,
    drop_below: float = 0.0,
    workers: Optional[int] = None,
) -> WaveletCoeffs:
    """
    Coefficients ``⟨f, θ^{(λ)}_Q⟩`` for every window cube by the Riemann sum on the
    sampling grid of ``f``.

    Parameters
    ----------
    f : SampledFunction
        Samples at resolution between ``window.j_max + 2`` and
        ``window.j_min + system.levels``.
    system : WaveletSystem
        The wavelet system.
    window : LatticeWindow
        Cubes to analyze against.
    types : Optional[Sequence[Tuple[int, ...]]]
        Types ``λ``; all of ``Λ_n`` by default.
    drop_below : float
        Coefficients with every component at most this are not stored.
    workers : Optional[int]
        Parallel jobs over ``(j, λ)`` blocks.

    Returns
    -------
    WaveletCoeffs

    Raises
    ------
    ValueError
        If the resolution is out of range or the dimensions disagree.
    """
    if not f.n == window.n == system.n:
        raise ValueError(
            f"Dimensions disagree: function {f.n}, window {window.n}, system {system.n}"
        )
    check_resolution(system, window, f.resolution)
    types = system.types if types is None else [tuple(lam) for lam in types]
    blocks = [
        (j, lam, np.arange(-window.index_bound(j), window.index_bound(j)))
        for j in window.scales
        for lam in types
    ]
    results = Parallel(n_jobs=resolve_workers(workers))(
        delayed(_analyze_block)(system, f, j, lam, positions)
        for j, lam, positions in blocks
    )
    entries = {}
    for block in results:
        for key, value in block.items():
            if np.abs(value).max() > drop_below:
                entries[key] = value
    return WaveletCoeffs(entries, f.n, f.m, system.k)


def synthesize(
    coeffs: WaveletCoeffs, system: WaveletSystem, resolution: int
) -> SampledFunction:
    """
    ``Σ c_{(λ, Q)} θ^{(λ)}_Q`` sampled at ``resolution`` on the smallest grid holding
    every support. Scaling types ``λ`` with zeros are allowed.

    Raises
    ------
    ValueError
        If a cube needs a cascade depth the system does not have.
    """
    n, m = coeffs.n, coeffs.m
    if len(coeffs) == 0:
        return SampledFunction(resolution, (0,) * n, np.zeros((1,) * n + (m,), complex))
    radius = system.support_radius
    lower = np.full(n, np.iinfo(np.int64).max)
    upper = np.full(n, np.iinfo(np.int64).min)
    groups: Dict[Tuple[int, Lambda], List[Tuple[DyadicCube, np.ndarray]]] = defaultdict(
        list
    )
    for (lam, Q), value in coeffs.items():
        depth = resolution - Q.j
        if depth < 0:
            raise ValueError(f"Resolution {resolution} is coarser than the cube {Q}")
        k = np.asarray(Q.k, dtype=np.int64)
        lower = np.minimum(lower, k << depth)
        upper = np.maximum(upper, (k + radius) << depth)
        groups[(Q.j, lam)].append((Q, value))
    axes = [np.arange(lo, up + 1) for lo, up in zip(lower, upper)]
    values = np.zeros(tuple(len(a) for a in axes) + (m,), dtype=complex)
    for (j, lam), members in sorted(groups.items()):
        positions = np.array([Q.k for Q, _ in members])
        first = positions.min(axis=0)
        shape = tuple(positions.max(axis=0) - first + 1)
        dense = np.zeros(shape + (m,), dtype=complex)
        for Q, value in members:
            dense[tuple(np.asarray(Q.k) - first)] += value
        matrices = [
            system.factor_matrix(
                bit, j, first[axis] + np.arange(shape[axis]), resolution, axes[axis]
            ).T
            for axis, bit in enumerate(lam)
        ]
        values += _contract(dense, matrices)
    return SampledFunction(resolution, tuple(int(lo) for lo in lower), values)


def _axis_rows(
    system: WaveletSystem, window: LatticeWindow, resolution: int, bits: Sequence[int]
) -> Tuple[Dict[Tuple[int, int, int], int], np.ndarray]:
    radius = system.support_radius
    low = min(-window.index_bound(j) << (resolution - j) for j in window.scales)
    high = max(
        (window.index_bound(j) - 1 + radius) << (resolution - j) for j in window.scales
    )
    grid = np.arange(low, high + 1)
    rows, index = [], {}
    for j in window.scales:
        positions = np.arange(-window.index_bound(j), window.index_bound(j))
        for bit in bits:
            block = system.factor_matrix(bit, j, positions, resolution, grid)
            for position, row in zip(positions, block):
                index[(bit, j, int(position))] = len(rows)
                rows.append(row)
    return index, np.asarray(rows)


def gram_residual(
    system: WaveletSystem,
    window: LatticeWindow,
    resolution: Optional[int] = None,
    types: Optional[Sequence[Lambda]] = None,
) -> float:
    """
    ``max |⟨θ^{(λ)}_Q, θ^{(μ)}_R⟩ - δ_{λμ} δ_{QR}|`` over window cubes and types,
    with Riemann sums at ``resolution`` (``window.j_min + levels`` by default).
    """
    resolution = window.j_min + system.levels if resolution is None else resolution
    check_resolution(system, window, resolution)
    types = system.types if types is None else [tuple(lam) for lam in types]
    bits = sorted({bit for lam in types for bit in lam})
    index, rows = _axis_rows(system, window, resolution, bits)
    gram_1d = rows @ rows.T * math.ldexp(1.0, -resolution)
    members = [
        [index[(bit, Q.j, Q.k[axis])] for axis, bit in enumerate(lam)]
        for lam in types
        for Q in window.all_cubes()
    ]
    members_array = np.asarray(members)
    gram = np.ones((len(members), len(members)))
    for axis in range(system.n):
        ids = members_array[:, axis]
        gram *= gram_1d[np.ix_(ids, ids)]
    residual = float(np.max(np.abs(gram - np.eye(len(members)))))
    logger.info(
        f"Gram residual {residual:.3e} over {len(members)} functions (k={system.k})"
    )
    return residual


def moment_residual(system: WaveletSystem, max_degree: Optional[int] = None) -> float:
    """
    ``max |∫ θ^{(λ)} x^γ dx|`` over ``λ ∈ Λ_n`` and ``|γ| <= max_degree``
    (``k - 1`` by default), by Riemann sums of the finest cascade samples.
    """
    max_degree = system.k - 1 if max_degree is None else max_degree
    level = system.levels
    grid = system.samples.grid(level)
    step = math.ldexp(1.0, -level)
    moments = {
        bit: np.array(
            [
                step * float(np.sum(grid ** degree * system.factor_samples(bit, level)))
                for degree in range(max_degree + 1)
            ]
        )
        for bit in (0, 1)
    }
    residual = 0.0
    for lam in system.types:
        for gamma in multi_indices(system.n, max_degree):
            value = np.prod([moments[bit][g] for bit, g in zip(lam, gamma)])
            residual = max(residual, abs(float(value)))
    return residual


def scaling_integral(system: WaveletSystem) -> float:
    """``∫ φ`` by the Riemann sum of the finest samples; one up to rounding."""
    level = system.levels
    return math.ldexp(float(np.sum(system.factor_samples(0, level))), -level)


def minimal_wavelet_order(E_star: float, F_star: float, n: int) -> int:
    """
    The smallest ``k >= 1`` with ``k > max(E* - n/2, F* - n/2)``.

    >>> minimal_wavelet_order(0.5, 0.5, 1)
    1
    """
    bound = max(E_star - n / 2, F_star - n / 2)
    return max(1, int(math.floor(bound)) + 1)


def coeffs_norm(
    coeffs: WaveletCoeffs,
    params: SpaceParams,
    W: Optional[MatrixWeight] = None,
    window: Optional[LatticeWindow] = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """The sum over ``λ`` of the sequence norms of the components of ``coeffs``."""
    total = 0.0
    for lam in coeffs.types():
        component = coeffs.component(lam)
        if W is None:
            total += unweighted_norm(component, params, window)
        else:
            total += weighted_norm(component, W, params, window, quad)
    return total
