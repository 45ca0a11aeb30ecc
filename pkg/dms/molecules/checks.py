# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..almostdiag import thresholds
from ..lattice import DyadicCube
from ..seqspace import SpaceParams
from ..utils import cartesian_product, exact_order_indices, multi_indices, resolve_workers
from .brackets import bracket_fns
from .handles import SmoothFunctionHandle, envelope

logger = logging.getLogger(__name__)

ANALYSIS = "analysis"
SYNTHESIS = "synthesis"

DECAY = "decay"
MOMENTS = "moments"
SMOOTHNESS = "smoothness"
HOLDER = "holder"


class MoleculeParams(NamedTuple):
    K: float
    L: float
    M: float
    N: float


class MoleculeBounds(NamedTuple):
    """
    Admissible molecule parameters of a family: ``K > K``, ``L >= L``, ``M > M`` and
    ``N > N``.
    """

    kind: str
    K: float
    L: float
    M: float
    N: float

    def admits(self, params: MoleculeParams) -> bool:
        return (
            params.K > self.K
            and params.L >= self.L
            and params.M > self.M
            and params.N > self.N
        )

    def example(self, margin: float = 0.5) -> MoleculeParams:
        """Admissible parameters ``margin`` above the open bounds."""
        return MoleculeParams(
            K=max(self.K, 0.0) + margin,
            L=self.L,
            M=max(self.M, 0.0) + margin,
            N=self.N + margin,
        )


class MoleculeGrid(NamedTuple):
    """
    Sampling used by :func:`molecule_check`.

    Points are ``x_Q + ℓ(Q) i 2^{-level}`` for integers ``i`` covering
    ``[-radius, radius + 1]`` per axis, which is symmetric about the center of
    ``Q``. The Hölder condition compares each point with ``probes`` partners at
    distances ``ℓ(Q) 2^{-a}``, ``a = 0, ..., probes - 1``.
    """

    radius: float = 6.0
    level: int = 8
    probes: int = 8
    tol: float = 0.05
    moment_tol: float = 1e-6
    workers: Optional[int] = None

    def offsets(self) -> np.ndarray:
        steps = 1 << self.level
        reach = int(round(self.radius * steps))
        return np.arange(-reach, reach + steps + 1) / steps

    def points(self, Q: DyadicCube) -> Tuple[np.ndarray, float]:
        """Grid points of shape ``(N, n)`` and the volume of one grid cell."""
        unit = self.offsets()
        points = Q.corner[None, :] + Q.side * cartesian_product(*([unit] * Q.n))
        return points, (Q.side * 2.0 ** -self.level) ** Q.n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "radius": self.radius,
            "level": self.level,
            "probes": self.probes,
            "tol": self.tol,
            "moment_tol": self.moment_tol,
        }


class ConditionResult(NamedTuple):
    name: str
    checked: bool
    ratio: float
    passed: bool
    worst_point: Optional[List[float]]


class MoleculeReport(NamedTuple):
    cube: DyadicCube
    params: MoleculeParams
    grid: MoleculeGrid
    conditions: List[ConditionResult]

    @property
    def passed(self) -> bool:
        return all(condition.passed for condition in self.conditions)

    def ratio(self, name: str) -> float:
        for condition in self.conditions:
            if condition.name == name:
                return condition.ratio
        raise KeyError(name)

    def constant(self) -> float:
        """Smallest ``c`` such that ``g / c`` passes every checked condition."""
        return max(
            (condition.ratio for condition in self.conditions if condition.checked),
            default=0.0,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cube": self.cube.to_dict(),
            "params": self.params._asdict(),
            "grid": self.grid.to_dict(),
            "passed": self.passed,
            "conditions": [condition._asdict() for condition in self.conditions],
        }


def _result(
    name: str, ratios: np.ndarray, points: np.ndarray, grid: MoleculeGrid
) -> ConditionResult:
    if len(ratios) == 0:
        return ConditionResult(name, False, 0.0, True, None)
    worst = int(np.argmax(ratios))
    ratio = float(ratios[worst])
    return ConditionResult(
        name, True, ratio, ratio <= 1 + grid.tol, points[worst].tolist()
    )


def _derivative_ratios(
    points: np.ndarray,
    g: SmoothFunctionHandle,
    Q: DyadicCube,
    gamma: Tuple[int, ...],
    M: float,
) -> np.ndarray:
    values = np.abs(g.derivative(points, gamma)) * Q.side ** sum(gamma)
    return values / envelope(points, Q, M)


def _holder_ratios(
    points: np.ndarray,
    g: SmoothFunctionHandle,
    Q: DyadicCube,
    gamma: Tuple[int, ...],
    M: float,
    star: float,
    probes: int,
) -> np.ndarray:
    base = g.derivative(points, gamma)
    from_corner = np.linalg.norm(points - Q.corner[None, :], axis=1)
    worst = np.zeros(len(points))
    for a in range(probes):
        step = Q.side * 2.0 ** -a
        shift = np.zeros(Q.n)
        shift[a % Q.n] = step if a % 2 == 0 else -step
        difference = np.abs(g.derivative(points + shift[None, :], gamma) - base)
        shifted = np.maximum(from_corner - step, 0.0) / Q.side
        bound = (
            Q.side ** (-sum(gamma))
            * (step / Q.side) ** star
            * (1.0 + shifted) ** (-M)
            / np.sqrt(Q.volume)
        )
        worst = np.maximum(worst, difference / bound)
    return worst


def _chunked(
    fn: Callable[..., np.ndarray], points: np.ndarray, workers: Optional[int], *args: Any
) -> np.ndarray:
    n_jobs = resolve_workers(workers)
    if n_jobs == 1:
        return fn(points, *args)
    chunks = np.array_split(points, 4 * abs(n_jobs))
    parts = Parallel(n_jobs=n_jobs)(delayed(fn)(chunk, *args) for chunk in chunks)
    return np.concatenate(parts)


def _check_order(g: SmoothFunctionHandle, order: int) -> None:
    for gamma in multi_indices(g.n, order):
        if not g.has_exact(gamma) and not g.finite_differences:
            raise ValueError(
                f"Handle {g.label} provides derivatives up to order {g.max_order}, "
                f"order {order} is needed"
            )


def molecule_check(
    g: SmoothFunctionHandle,
    Q: DyadicCube,
    params: MoleculeParams,
    grid: MoleculeGrid = MoleculeGrid(),
) -> MoleculeReport:
    """
    Samples the four molecule conditions of ``g`` near ``Q``.

    - decay: ``|g| <= (u_K)_Q``
    - moments: ``∫ g(x) ((x - x_Q)/ℓ(Q))^γ dx = 0`` for ``|γ| <= L``, skipped when
      ``L < 0``; the ratio is the largest moment, normalized by ``|Q|^{1/2}``, over
      ``grid.moment_tol``
    - smoothness: ``|∂^γ g| <= ℓ(Q)^{-|γ|} (u_M)_Q`` for ``|γ| < N``
    - holder: ``|∂^γ g(x) - ∂^γ g(y)| <= ℓ(Q)^{-|γ|} (|x-y|/ℓ(Q))^{N**}
      sup_{|z| <= |x-y|} (u_M)_Q(x + z)`` for ``|γ| = ⌊⌊N⌋⌋``

    Each condition passes when its worst ratio is at most ``1 + grid.tol``.

    Parameters
    ----------
    g : SmoothFunctionHandle
        The candidate molecule.
    Q : DyadicCube
        The cube it is associated with.
    params : MoleculeParams
        ``(K, L, M, N)``.
    grid : MoleculeGrid
        Sampling settings.

    Returns
    -------
    MoleculeReport

    Raises
    ------
    ValueError
        If ``K`` or ``M`` is negative, the grid is coarser than an eighth of
        ``g.radius`` or does not cover ``Q``, or ``g`` lacks the needed derivatives.
    """
    if params.K < 0 or params.M < 0:
        raise ValueError(f"K and M must be nonnegative, got {params}")
    if grid.radius < 1:
        raise ValueError(f"Grid radius must be at least 1, got {grid.radius}")
    if Q.side * 2.0 ** -grid.level > g.radius / 8:
        raise ValueError(
            f"Grid step {Q.side * 2.0 ** -grid.level:.3g} is too coarse for a handle "
            f"of radius {g.radius:.3g}"
        )
    N_brackets = bracket_fns(params.N)
    order = N_brackets.strict_floor
    _check_order(g, order)

    points, cell = grid.points(Q)
    values = np.asarray(g(points))
    conditions = [
        _result(DECAY, np.abs(values) / envelope(points, Q, params.K), points, grid)
    ]

    if params.L >= 0:
        relative = (points - Q.corner[None, :]) / Q.side
        moments = np.array(
            [
                abs(np.sum(values * np.prod(relative ** np.asarray(gamma), axis=1)))
                * cell
                / np.sqrt(Q.volume)
                for gamma in multi_indices(Q.n, bracket_fns(params.L).floor)
            ]
        )
        moment_ratio = float(moments.max()) / grid.moment_tol
        conditions.append(
            ConditionResult(
                MOMENTS, True, moment_ratio, moment_ratio <= 1 + grid.tol, None
            )
        )
    else:
        conditions.append(ConditionResult(MOMENTS, False, 0.0, True, None))

    smooth = [
        _chunked(_derivative_ratios, points, grid.workers, g, Q, gamma, params.M)
        for gamma in multi_indices(Q.n, order)
    ]
    conditions.append(
        _result(
            SMOOTHNESS,
            np.max(smooth, axis=0) if smooth else np.zeros(0),
            points,
            grid,
        )
    )

    if order >= 0:
        holder = np.max(
            [
                _chunked(
                    _holder_ratios,
                    points,
                    grid.workers,
                    g,
                    Q,
                    gamma,
                    params.M,
                    N_brackets.star,
                    grid.probes,
                )
                for gamma in exact_order_indices(Q.n, order)
            ],
            axis=0,
        )
        conditions.append(_result(HOLDER, holder, points, grid))
    else:
        conditions.append(ConditionResult(HOLDER, False, 0.0, True, None))

    report = MoleculeReport(Q, params, grid, conditions)
    logger.info(
        f"Molecule check of {g.label} on {Q} with {params}: passed={report.passed}, "
        + ", ".join(f"{c.name}={c.ratio:.4g}" for c in conditions if c.checked)
    )
    return report


def family_thresholds(
    params: SpaceParams, d_lower: float, d_upper: float, kind: str = SYNTHESIS
) -> MoleculeBounds:
    """
    Bounds on ``(K, L, M, N)`` for the analysis or synthesis molecules of the space.

    Analysis molecules need ``K > D* ∨ (E* + n/2)``, ``L >= E* - n/2``, ``M > D*``
    and ``N > F* - n/2``; synthesis molecules swap the roles of ``E*`` and ``F*``.

    Examples
    --------
    >>> from dms.seqspace import make_space_params
    >>> family_thresholds(make_space_params("B", 0.0, 2.0, 2.0), 0.0, 0.0)
    MoleculeBounds(kind='synthesis', K=1.0, L=0.0, M=1.0, N=0.0)
    """
    if kind not in (ANALYSIS, SYNTHESIS):
        raise ValueError(f"kind must be {ANALYSIS!r} or {SYNTHESIS!r}, got {kind!r}")
    t = thresholds(params, d_lower, d_upper)
    half = params.n / 2
    if kind == ANALYSIS:
        first, second = t.E_star, t.F_star
    else:
        first, second = t.F_star, t.E_star
    return MoleculeBounds(
        kind=kind,
        K=max(t.D_star, first + half),
        L=first - half,
        M=t.D_star,
        N=second - half,
    )


class AtomReport(NamedTuple):
    outside_max: float
    moment_max: float
    derivative_ratio: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return self._asdict()


def atom_check(
    a: SmoothFunctionHandle,
    Q: DyadicCube,
    L: float,
    N: float,
    grid: MoleculeGrid = MoleculeGrid(radius=2.0),
) -> AtomReport:
    """
    Samples the atom conditions: ``a`` vanishes off ``3Q``, has vanishing moments of
    order ``<= L`` and ``|∂^γ a| <= |Q|^{-1/2 - |γ|/n}`` for ``|γ| <= N``.
    """
    points, cell = grid.points(Q)
    values = np.asarray(a(points))
    relative = (points - Q.center[None, :]) / Q.side
    outside = np.any(np.abs(relative) >= 1.5, axis=1)
    outside_max = float(np.abs(values[outside]).max()) if outside.any() else 0.0

    moment_max = 0.0
    if L >= 0:
        for gamma in multi_indices(Q.n, bracket_fns(L).floor):
            moment = np.sum(values * np.prod(relative ** np.asarray(gamma), axis=1))
            moment_max = max(moment_max, abs(moment) * cell / np.sqrt(Q.volume))

    derivative_ratio = 0.0
    for gamma in multi_indices(Q.n, bracket_fns(N).floor):
        bound = Q.volume ** (-0.5 - sum(gamma) / Q.n)
        derivative_ratio = max(
            derivative_ratio, float(np.abs(a.derivative(points, gamma)).max()) / bound
        )
    passed = (
        outside_max == 0.0
        and moment_max <= grid.moment_tol
        and derivative_ratio <= 1 + grid.tol
    )
    return AtomReport(outside_max, moment_max, derivative_ratio, passed)
