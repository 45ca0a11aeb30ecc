# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import warnings
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..lattice import Box, DyadicCube, LatticeWindow
from ..utils import resolve_workers
from .quadrature import QuadratureSpec, dilate
from .weights import MatrixWeight

logger = logging.getLogger(__name__)

LOWER = "lower"
UPPER = "upper"
_CHUNK = 256


def _averaged_norms(
    W: MatrixWeight, inner: Box, outer: Box, p: float, quad: QuadratureSpec
) -> np.ndarray:
    """
    ``⨍_inner ||W^{1/p}(x) W^{-1/p}(y)||^p dx`` for every outer node ``y``.
    """
    x, wx = quad.box_nodes(inner.lower, inner.upper)
    y, _ = quad.box_nodes(outer.lower, outer.upper)
    forward = W.power(x, 1.0 / p)
    backward = W.power(y, -1.0 / p)
    if W.m == 1:
        norms = np.abs(forward[:, 0, 0][:, None] * backward[:, 0, 0][None, :]) ** p
        return wx @ norms
    averages = np.empty(len(y))
    for start in range(0, len(y), _CHUNK):
        block = backward[start : start + _CHUNK]
        products = np.einsum("xik,ykj->xyij", forward, block)
        norms = np.linalg.norm(products, ord=2, axis=(-2, -1)) ** p
        averages[start : start + _CHUNK] = wx @ norms
    return averages


def apinf_box_value(
    W: MatrixWeight,
    inner: Box,
    outer: Box,
    p: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """
    ``exp(⨍_outer log(⨍_inner ||W^{1/p}(x) W^{-1/p}(y)||^p dx) dy)`` by tensor
    quadrature.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    _, wy = quad.box_nodes(outer.lower, outer.upper)
    averages = _averaged_norms(W, inner, outer, p, quad)
    return float(np.exp(wy @ np.log(averages)))


def apinf_cube_value(
    W: MatrixWeight,
    Q: DyadicCube,
    p: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """
    The ``A_{p,∞}`` double average of ``W`` over a single cube.

    Parameters
    ----------
    W : MatrixWeight
        The weight.
    Q : DyadicCube
        The cube, both for the inner ``x`` and outer ``y`` averages.
    p : float
        Integrability exponent, ``p > 0``.
    quad : QuadratureSpec
        Tensor quadrature rule.

    Returns
    -------
    float
        The value; it is at least 1 up to quadrature error. A value below one by
        more than ``1e-8`` raises a ``UserWarning``.

    Raises
    ------
    ValueError
        If ``p <= 0`` or ``W`` is singular at a quadrature node.
    """
    box = Box.of_cube(Q)
    value = apinf_box_value(W, box, box, p, quad)
    if value < 1 - 1e-8:
        warnings.warn(
            f"Jensen lower bound violated on {Q}: value {value:.10f} < 1", UserWarning
        )
    return value


def apinf_characteristic(
    W: MatrixWeight,
    p: float,
    window: LatticeWindow,
    quad: QuadratureSpec = QuadratureSpec(),
    workers: Optional[int] = None,
) -> float:
    """
    ``[W]_{A_{p,∞}}`` restricted to ``window``: the largest cube value.

    Cube values are independent and computed with joblib over ``workers``
    processes.
    """
    cubes = window.all_cubes()
    if len(cubes) == 0:
        raise ValueError(f"Window {window} has no cubes")
    values = Parallel(n_jobs=resolve_workers(workers))(
        delayed(apinf_cube_value)(W, Q, p, quad) for Q in cubes
    )
    best = int(np.argmax(values))
    logger.info(
        f"A_(p,inf) characteristic of {W.label} over {len(cubes)} cubes is "
        f"{values[best]:.6g}, attained at {cubes[best]}"
    )
    return float(values[best])


class DimensionEstimate(NamedTuple):
    """
    Log-log slope estimate of an ``A_{p,∞}`` lower or upper dimension.

    ``table[c, l]`` holds the double average for base cube ``cubes[c]`` and dilation
    ``lambdas[l]``. ``value`` is the largest nonnegative slope over base cubes, with
    the fit residual and the cube that attains it. This is an estimator, not the
    infimum of the definition.
    """

    side: str
    value: float
    lambdas: np.ndarray
    cubes: List[DyadicCube]
    table: np.ndarray
    residual: float
    cube: DyadicCube


class DimensionPair(NamedTuple):
    lower: DimensionEstimate
    upper: DimensionEstimate

    @property
    def d_lower_hat(self) -> float:
        return self.lower.value

    @property
    def d_upper_hat(self) -> float:
        return self.upper.value


def _slot_value(
    W: MatrixWeight,
    Q: DyadicCube,
    factor: float,
    side: str,
    p: float,
    quad: QuadratureSpec,
) -> float:
    base = Box.of_cube(Q)
    dilated = dilate(Q, factor)
    if side == LOWER:
        return apinf_box_value(W, inner=base, outer=dilated, p=p, quad=quad)
    return apinf_box_value(W, inner=dilated, outer=base, p=p, quad=quad)


def _dilation_row(
    W: MatrixWeight,
    Q: DyadicCube,
    lambdas: np.ndarray,
    side: str,
    p: float,
    quad: QuadratureSpec,
) -> List[float]:
    return [_slot_value(W, Q, float(lam), side, p, quad) for lam in lambdas]


def _fits_window(Q: DyadicCube, factor: float, window: LatticeWindow) -> bool:
    box = dilate(Q, factor)
    return bool(
        np.all(np.asarray(box.lower) >= -window.extent)
        and np.all(np.asarray(box.upper) <= window.extent)
    )


def _fit_slope(log_lambdas: np.ndarray, log_values: np.ndarray) -> Tuple[float, float]:
    design = np.vstack([np.ones_like(log_lambdas), log_lambdas]).T
    coefficients, *_ = np.linalg.lstsq(design, log_values, rcond=None)
    fitted = design @ coefficients
    residual = float(np.sqrt(np.mean((fitted - log_values) ** 2)))
    return float(coefficients[1]), residual


def dimension_estimate(
    W: MatrixWeight,
    p: float,
    window: LatticeWindow,
    lambdas: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
    side: str = LOWER,
    cubes: Optional[Sequence[DyadicCube]] = None,
    quad: QuadratureSpec = QuadratureSpec(),
    workers: Optional[int] = None,
) -> DimensionEstimate:
    """
    Estimates the ``A_{p,∞}`` lower or upper dimension of ``W`` by the slope of
    ``log(value)`` against ``log(λ)``.

    The dilated cube ``λQ`` (same center, side ``λℓ(Q)``) takes the outer ``y``
    average for the lower dimension and the inner ``x`` average for the upper one.

    Parameters
    ----------
    W : MatrixWeight
        The weight.
    p : float
        Integrability exponent.
    window : LatticeWindow
        Supplies the base cubes and the spatial extent dilations must stay in.
    lambdas : Sequence[float]
        At least three dilation factors, each ``>= 1``.
    side : str
        ``"lower"`` or ``"upper"``.
    cubes : Optional[Sequence[DyadicCube]]
        Base cubes. Defaults to every window cube whose largest dilation stays in
        the window.
    quad : QuadratureSpec
        Tensor quadrature rule.
    workers : Optional[int]
        joblib workers for the per-cube computations.

    Returns
    -------
    DimensionEstimate

    Raises
    ------
    ValueError
        On fewer than three or sub-unit ``lambdas``, an unknown ``side``, or an
        explicit base cube whose dilation leaves the window.
    """
    if side not in (LOWER, UPPER):
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    lambdas = np.asarray(sorted(float(lam) for lam in lambdas))
    if len(lambdas) < 3 or lambdas[0] < 1:
        raise ValueError("dimension_estimate needs at least three lambdas >= 1")
    largest = float(lambdas[-1])
    if cubes is None:
        base = [Q for Q in window.all_cubes() if _fits_window(Q, largest, window)]
        if len(base) == 0:
            raise ValueError(f"No cube of {window} fits a dilation by {largest}")
    else:
        base = list(cubes)
        for Q in base:
            if not _fits_window(Q, largest, window):
                raise ValueError(
                    f"Dilating {Q} by {largest} leaves the window extent "
                    f"{window.extent}"
                )
    rows = Parallel(n_jobs=resolve_workers(workers))(
        delayed(_dilation_row)(W, Q, lambdas, side, p, quad) for Q in base
    )
    table = np.asarray(rows, dtype=float)
    log_lambdas = np.log(lambdas)
    fits = [_fit_slope(log_lambdas, np.log(row)) for row in table]
    slopes = np.array([max(slope, 0.0) for slope, _ in fits])
    best = int(np.argmax(slopes))
    estimate = DimensionEstimate(
        side=side,
        value=float(slopes[best]),
        lambdas=lambdas,
        cubes=base,
        table=table,
        residual=fits[best][1],
        cube=base[best],
    )
    logger.info(
        f"Estimated A_(p,inf) {side} dimension of {W.label}: {estimate.value:.6g} "
        f"(fit residual {estimate.residual:.3g}, cube {estimate.cube})"
    )
    if side == LOWER and estimate.value >= W.n:
        warnings.warn(
            f"estimated lower dimension {estimate.value:.4g} is not below n={W.n}",
            UserWarning,
        )
    return estimate


def estimate_dimensions(
    W: MatrixWeight,
    p: float,
    window: LatticeWindow,
    lambdas: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
    cubes: Optional[Sequence[DyadicCube]] = None,
    quad: QuadratureSpec = QuadratureSpec(),
    workers: Optional[int] = None,
) -> DimensionPair:
    """Both dimension estimates on the same base cubes."""
    return DimensionPair(
        lower=dimension_estimate(W, p, window, lambdas, LOWER, cubes, quad, workers),
        upper=dimension_estimate(W, p, window, lambdas, UPPER, cubes, quad, workers),
    )
