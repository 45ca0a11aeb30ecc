# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from ..lattice import DyadicCube, LatticeWindow
from ..matweight import MatrixWeight, QuadratureSpec
from ..seqspace import CoeffSequence, SpaceParams, random_ensemble, weighted_norm
from ..utils import resolve_workers
from .matrices import (
    DEFAULT_CUTOFF,
    AdEnvelope,
    EnvelopeOperator,
    Operator,
    OperatorMatrix,
    apply,
    identity_matrix,
)

logger = logging.getLogger(__name__)

OperatorFactory = Callable[[LatticeWindow], Operator]


class EnsembleSpec(NamedTuple):
    """
    Random test sequences: ``size`` members with ``support_size`` complex Gaussian
    coefficients on window cubes, optionally only at scales in ``scales``
    (inclusive bounds).
    """

    size: int = 50
    support_size: int = 8
    seed: int = 0
    scales: Optional[Tuple[int, int]] = None

    def draw(self, window: LatticeWindow, m: int) -> List[CoeffSequence]:
        cubes = window.all_cubes()
        if self.scales is not None:
            low, high = self.scales
            cubes = [Q for Q in cubes if low <= Q.j <= high]
        return random_ensemble(
            window, self.size, self.support_size, m, self.seed, cubes=cubes
        )


class EnvelopeFactory(NamedTuple):
    """``u^{DEF}`` on all cubes of whatever window it is called with, times ``scale``."""

    envelope: AdEnvelope
    scale: float = 1.0

    def __call__(self, window: LatticeWindow) -> EnvelopeOperator:
        return EnvelopeOperator(window.all_cubes(), self.envelope, self.scale)


class IdentityFactory(NamedTuple):
    scale: float = 1.0

    def __call__(self, window: LatticeWindow) -> OperatorMatrix:
        return self.scale * identity_matrix(window.all_cubes())


class BoundednessReport(NamedTuple):
    """
    Ratios ``‖Ut‖/‖t‖`` over an ensemble on a window and on the same window refined
    by one scale, with the relative drift of the maximum between the two.
    """

    ratios: np.ndarray
    max_ratio: float
    median_ratio: float
    refined_ratios: np.ndarray
    refined_max_ratio: float
    refined_median_ratio: float
    drift: float
    skipped: int


def _member_ratio(
    U: Operator,
    W: MatrixWeight,
    params: SpaceParams,
    t: CoeffSequence,
    window: LatticeWindow,
    quad: QuadratureSpec,
    cutoff: float,
) -> float:
    denominator = weighted_norm(t, W, params, window, quad)
    if denominator == 0:
        return float("nan")
    image = apply(U, t, cutoff).sequence
    return weighted_norm(image, W, params, window, quad) / denominator


def _ensemble_ratios(
    U: Operator,
    W: MatrixWeight,
    params: SpaceParams,
    ensemble: Sequence[CoeffSequence],
    window: LatticeWindow,
    quad: QuadratureSpec,
    cutoff: float,
    workers: Optional[int],
) -> np.ndarray:
    ratios = Parallel(n_jobs=resolve_workers(workers))(
        delayed(_member_ratio)(U, W, params, t, window, quad, cutoff) for t in ensemble
    )
    return np.asarray(ratios, dtype=float)


def empirical_boundedness(
    U: Union[Operator, OperatorFactory],
    W: MatrixWeight,
    params: SpaceParams,
    ensemble: EnsembleSpec = EnsembleSpec(),
    window: Optional[LatticeWindow] = None,
    quad: QuadratureSpec = QuadratureSpec(),
    cutoff: float = DEFAULT_CUTOFF,
    workers: Optional[int] = None,
) -> BoundednessReport:
    """
    Norm ratios ``‖Ut‖/‖t‖`` in ``ȧ^{s,υ}_{p,q}(W)`` over a random ensemble.

    The ensemble is drawn once on ``window`` and reused on ``window.refined()``.
    When ``U`` is a factory it is rebuilt on each window; a fixed matrix is reused.

    Parameters
    ----------
    U : Union[OperatorMatrix, EnvelopeOperator, Callable]
        The operator, or a factory producing it for a window.
    W : MatrixWeight
        The weight.
    params : SpaceParams
        The space.
    ensemble : EnsembleSpec
        Size, support size, seed and scale range of the random sequences.
    window : Optional[LatticeWindow]
        Base window; defaults to ``LatticeWindow(n=params.n)``.
    quad : QuadratureSpec
        Sampling level of ``W^{1/p}``.
    cutoff : float
        Relative truncation of ``U`` in :func:`apply`.
    workers : Optional[int]
        Parallel jobs over ensemble members.

    Returns
    -------
    BoundednessReport
        Sequences with zero norm are skipped and counted.
    """
    window = LatticeWindow(n=params.n) if window is None else window
    members = ensemble.draw(window, params.m)
    refined = window.refined()
    base_operator = U(window) if callable(U) else U
    refined_operator = U(refined) if callable(U) else U
    ratios = _ensemble_ratios(
        base_operator, W, params, members, window, quad, cutoff, workers
    )
    refined_ratios = _ensemble_ratios(
        refined_operator, W, params, members, refined, quad, cutoff, workers
    )
    valid = ~np.isnan(ratios)
    skipped = int(np.sum(~valid))
    if skipped:
        logger.warning(f"Skipped {skipped} ensemble members with zero norm")
    if not np.any(valid):
        raise ValueError("Every ensemble member has zero norm")
    ratios, refined_ratios = ratios[valid], refined_ratios[valid]
    max_ratio = float(ratios.max())
    refined_max = float(refined_ratios.max())
    drift = abs(refined_max - max_ratio) / max_ratio
    logger.info(
        f"Boundedness ratios: max {max_ratio:.6g}, refined max {refined_max:.6g}, "
        f"drift {drift:.3%}"
    )
    return BoundednessReport(
        ratios=ratios,
        max_ratio=max_ratio,
        median_ratio=float(np.median(ratios)),
        refined_ratios=refined_ratios,
        refined_max_ratio=refined_max,
        refined_median_ratio=float(np.median(refined_ratios)),
        drift=drift,
        skipped=skipped,
    )


class ProbeReport(NamedTuple):
    """Ratios of the crafted probe sequence on successively refined windows."""

    envelope: AdEnvelope
    j_max: List[int]
    ratios: List[float]


def refinement_probe(
    W: MatrixWeight,
    params: SpaceParams,
    envelope: AdEnvelope,
    window: LatticeWindow,
    refinements: int = 3,
    quad: QuadratureSpec = QuadratureSpec(),
) -> ProbeReport:
    """
    Applies ``u^{DEF}`` to a single coefficient on the coarsest window scale over
    ``refinements`` successive refinements of ``window``.

    Meant for envelopes below the thresholds, where the ratio is expected to grow
    with each finer scale. The result is reported and never asserted; no blow-up
    rate is claimed.
    """
    Q = DyadicCube(window.j_min, (0,) * window.n)
    t = CoeffSequence({Q: np.ones(params.m)}, window.n, params.m)
    factory = EnvelopeFactory(envelope)
    scales, ratios = [], []
    current = window
    for _ in range(refinements + 1):
        ratio = _member_ratio(
            factory(current), W, params, t, current, quad, cutoff=0.0
        )
        scales.append(current.j_max)
        ratios.append(ratio)
        logger.info(f"Probe ratio at j_max={current.j_max}: {ratio:.6g}")
        current = current.refined()
    return ProbeReport(envelope=envelope, j_max=scales, ratios=ratios)
