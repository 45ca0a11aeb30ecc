# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math
import warnings
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.utils import check_random_state

from ..almostdiag import EnsembleSpec
from ..growth import restrict_growth
from ..lattice import LatticeWindow, lift, project
from ..matweight import MatrixWeight, QuadratureSpec, cube_norms
from ..seqspace import B_FAMILY, F_FAMILY, CoeffSequence, SpaceParams
from ..utils import resolve_workers
from ..wavelets import (
    WaveletCoeffs,
    WaveletSystem,
    analyze,
    check_resolution,
    coeffs_norm,
    synthesize,
    wavelet_types,
)

logger = logging.getLogger(__name__)

TRACE = "trace"
EXTENSION = "ext"

K0_THRESHOLD = 1e-8
DROP_BELOW = 1e-12


def ext_coeffs(
    c: WaveletCoeffs, k0: int, phi_at_minus_k0: float
) -> WaveletCoeffs:
    """
    The extension of an ``n``-dimensional expansion to ``n + 1`` dimensions.

    Each coefficient ``c`` at ``(λ', Q')`` becomes ``c ℓ(Q')^{1/2} / φ(-k₀)`` at
    ``((λ', 0), P(Q', k₀))``; the map is exact, injective and keeps the support size.

    Parameters
    ----------
    c : WaveletCoeffs
        Coefficients over ``D(R^n)``.
    k0 : int
        The shift with ``φ(-k₀) ≠ 0``.
    phi_at_minus_k0 : float
        ``φ(-k₀)``.

    Returns
    -------
    WaveletCoeffs
        Coefficients over ``D(R^{n+1})``.

    Raises
    ------
    ValueError
        If ``|φ(-k₀)|`` is below ``1e-8``.
    """
    if abs(phi_at_minus_k0) < K0_THRESHOLD:
        raise ValueError(
            f"φ(-k0) = {phi_at_minus_k0:.3e} is too small to extend with k0={k0}"
        )
    entries = {
        (lam + (0,), lift(Q, k0)): value * math.sqrt(Q.side) / phi_at_minus_k0
        for (lam, Q), value in c.items()
    }
    return WaveletCoeffs(entries, c.n + 1, c.m, c.k)


def _integer_sample(system: WaveletSystem, bit: int, t: int) -> float:
    level = system.levels
    values = system.factor_samples(bit, level)
    index = t << level if t >= 0 else -1
    # the last sample is the right end of the support
    if 0 <= index < len(values) - 1:
        return float(values[index])
    return 0.0


def slice_coeffs(c: WaveletCoeffs, system: WaveletSystem) -> WaveletCoeffs:
    """
    The restriction to ``x_{n+1} = 0`` written in ``n``-dimensional tensor
    functions: ``θ^{(λ)}_P(x', 0) = 2^{j/2} φ^{(λ_{n+1})}(-k_{n+1}) θ^{(λ')}_{I(P)}(x')``.
    Types ``λ'`` may be zero (scaling functions). Shifts beyond the band
    ``|k_{n+1}| > M`` contribute nothing.
    """
    if c.n < 2:
        raise ValueError("Traces need coefficients in dimension at least 2")
    entries: Dict[Any, np.ndarray] = {}
    for (lam, P), value in c.items():
        shift = P.k[-1]
        if abs(shift) > system.band:
            continue
        factor = 2.0 ** (P.j / 2) * _integer_sample(system, lam[-1], -shift)
        if factor == 0:
            continue
        key = (lam[:-1], project(P))
        entries[key] = entries.get(key, 0) + factor * value
    return WaveletCoeffs(entries, c.n - 1, c.m, c.k)


def trace_coeffs(
    c: WaveletCoeffs,
    system: WaveletSystem,
    window: LatticeWindow,
    resolution: Optional[int] = None,
    workers: Optional[int] = None,
) -> WaveletCoeffs:
    """
    Wavelet coefficients of ``Tr f = f(·, 0)`` on an ``n``-dimensional window.

    The slice is sampled at ``resolution`` (``window.j_min + system.levels`` by
    default) from :func:`slice_coeffs` and analyzed again in the ``n``-dimensional
    system. Coefficients of magnitude below ``1e-12`` are dropped.

    Raises
    ------
    ValueError
        If the resolution does not fit both the window and the cascade depth.
    """
    if c.n != window.n + 1:
        raise ValueError(
            f"Coefficients live in R^{c.n}, the target window in R^{window.n}"
        )
    resolution = window.j_min + system.levels if resolution is None else resolution
    target = system.with_dimension(window.n)
    check_resolution(target, window, resolution)
    sliced = slice_coeffs(c, system)
    if len(sliced) == 0:
        return WaveletCoeffs({}, window.n, c.m, c.k)
    samples = synthesize(sliced, target, resolution)
    return analyze(samples, target, window, drop_below=DROP_BELOW, workers=workers)


def weight_compat_certificate(
    V: MatrixWeight,
    W: MatrixWeight,
    p: float,
    gamma: float,
    window: LatticeWindow,
    direction: str = TRACE,
    n_directions: int = 16,
    random_state: Any = 0,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """
    Smallest ``C`` with
    ``∫_{Q'} |V^{1/p} z|^p <= C 2^{j γ} ∫_{P(Q', 0)} |W^{1/p} z|^p`` (``trace``) or
    ``2^{j γ} ∫_{P(Q', 0)} |W^{1/p} z|^p <= C ∫_{Q'} |V^{1/p} z|^p`` (``ext``) over
    the window cubes ``Q'`` and a sample of directions ``z`` that includes the
    standard basis.

    Raises
    ------
    ValueError
        If the weights have different sizes or dimensions that do not differ by one,
        or an integral vanishes.
    """
    if direction not in (TRACE, EXTENSION):
        raise ValueError(f"direction must be {TRACE!r} or {EXTENSION!r}")
    if V.m != W.m or W.n != V.n + 1 or window.n != V.n:
        raise ValueError(
            f"Incompatible weights: V is {V.m}x{V.m} on R^{V.n}, W is {W.m}x{W.m} on "
            f"R^{W.n}, window in R^{window.n}"
        )
    rng = check_random_state(random_state)
    m = V.m
    samples = rng.standard_normal((n_directions, m)) + 1j * rng.standard_normal(
        (n_directions, m)
    )
    directions = np.vstack([np.eye(m), samples / np.linalg.norm(samples, axis=1)[:, None]])
    certificate = 0.0
    for Q in window.all_cubes():
        lower = Q.volume * cube_norms(V, Q, p, directions, quad) ** p
        P = lift(Q, 0)
        upper = P.volume * cube_norms(W, P, p, directions, quad) ** p
        scale = 2.0 ** (Q.j * gamma)
        if direction == TRACE:
            numerator, denominator = lower, scale * upper
        else:
            numerator, denominator = scale * upper, lower
        if np.any(denominator <= 0):
            raise ValueError(f"Degenerate weight integral on {Q}")
        certificate = max(certificate, float(np.max(numerator / denominator)))
    logger.info(
        f"Weight compatibility certificate ({direction}, gamma={gamma}): "
        f"{certificate:.6g}"
    )
    return certificate


def trace_smoothness_index(
    family: str, n: int, p: float, q: float, delta1: float
) -> float:
    """
    The index ``E`` of the trace theorems: ``n(1/p - δ₁)`` when ``δ₁ > 1/p`` (for
    Besov sources also when ``δ₁ = 1/p`` and ``q = ∞``), ``n(1/p - 1)₊`` otherwise.

    >>> trace_smoothness_index("B", 1, 0.5, 1.0, 0.0)
    1.0
    """
    family = family.upper()
    if family not in (B_FAMILY, F_FAMILY):
        raise ValueError(f"family must be 'B' or 'F', got {family!r}")
    at_boundary = math.isclose(delta1, 1.0 / p)
    above = delta1 > 1.0 / p and not at_boundary
    if above or (family == B_FAMILY and at_boundary and math.isinf(q)):
        return n * (1.0 / p - delta1)
    return n * max(1.0 / p - 1.0, 0.0)


class TraceExperiment(NamedTuple):
    """
    A trace or extension experiment between ``ȧ^{s,υ}_{p,q}(W)`` on ``R^{n+1}``
    and the Besov space ``ḃ^{s-γ/p,υ'}_{p,q'}(V)`` on ``R^n``, where ``υ'`` is the
    restriction of ``υ`` and ``q' = q`` for Besov sources, ``q' = p`` otherwise.
    """

    source: SpaceParams
    W: MatrixWeight
    V: MatrixWeight
    gamma: float
    system: WaveletSystem
    window: LatticeWindow
    d_upper: float = 0.0
    quad: QuadratureSpec = QuadratureSpec()

    @property
    def band(self) -> int:
        return self.system.band

    def target(self) -> SpaceParams:
        source = self.source
        return SpaceParams(
            family=B_FAMILY,
            s=source.s - self.gamma / source.p,
            p=source.p,
            q=source.q if source.is_b else source.p,
            growth=restrict_growth(source.growth),
            n=source.n - 1,
            m=source.m,
        )

    def source_window(self) -> LatticeWindow:
        return self.window.with_dimension(self.window.n + 1)

    def diagnostics(self) -> List[str]:
        """Violated preconditions of the trace theorems, empty when all hold."""
        source = self.source
        messages = []
        if source.n != self.window.n + 1:
            messages.append(
                f"source space lives in R^{source.n}, window in R^{self.window.n}"
            )
        delta1 = source.growth.growth_class.delta1
        if delta1 < 0:
            messages.append(f"delta1 = {delta1} is negative")
        E = trace_smoothness_index(source.family, self.window.n, source.p, source.q, delta1)
        bound = self.gamma / source.p + E + self.d_upper / source.p
        if not source.s > bound:
            messages.append(f"s = {source.s} is not above {bound:.6g}")
        return messages


class TraceReport(NamedTuple):
    direction: str
    certificate: float
    ratios: np.ndarray
    max_ratio: float
    median_ratio: float
    refined_ratios: np.ndarray
    refined_max_ratio: float
    drift: float
    skipped: int
    warnings: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction,
            "certificate": self.certificate,
            "ratios": self.ratios.tolist(),
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "refined_ratios": self.refined_ratios.tolist(),
            "refined_max_ratio": self.refined_max_ratio,
            "drift": self.drift,
            "skipped": self.skipped,
            "warnings": list(self.warnings),
        }


def _typed_members(
    experiment: TraceExperiment, ensemble: EnsembleSpec, lifted: bool
) -> List[WaveletCoeffs]:
    """
    Random wavelet expansions from the ensemble sequences: each cube gets a random
    type of ``Λ_n`` and, when ``lifted``, a random vertical shift in the band and a
    random last type bit.
    """
    n = experiment.window.n
    m = experiment.source.m
    rng = check_random_state(ensemble.seed)
    types = wavelet_types(n)
    members = []
    for t in ensemble.draw(experiment.window, m):
        entries = {}
        for Q, value in t.items():
            lam = types[rng.randint(len(types))]
            if lifted:
                shift = int(rng.randint(-experiment.band, experiment.band + 1))
                entries[(lam + (int(rng.randint(2)),), lift(Q, shift))] = value
            else:
                entries[(lam, Q)] = value
        members.append(WaveletCoeffs(entries, n + 1 if lifted else n, m, experiment.system.k))
    return members


def _member_ratio(
    experiment: TraceExperiment,
    member: WaveletCoeffs,
    window: LatticeWindow,
    direction: str,
) -> float:
    source_window = window.with_dimension(window.n + 1)
    source, target = experiment.source, experiment.target()
    if direction == TRACE:
        denominator = coeffs_norm(member, source, experiment.W, source_window, experiment.quad)
        if denominator == 0:
            return float("nan")
        image = trace_coeffs(member, experiment.system, window)
        return coeffs_norm(image, target, experiment.V, window, experiment.quad) / denominator
    denominator = coeffs_norm(member, target, experiment.V, window, experiment.quad)
    if denominator == 0:
        return float("nan")
    k0 = experiment.system.k0
    image = ext_coeffs(member, k0.k0, k0.value)
    return coeffs_norm(image, source, experiment.W, source_window, experiment.quad) / denominator


def _ratios(
    experiment: TraceExperiment,
    members: Sequence[WaveletCoeffs],
    window: LatticeWindow,
    direction: str,
    workers: Optional[int],
) -> np.ndarray:
    ratios = Parallel(n_jobs=resolve_workers(workers))(
        delayed(_member_ratio)(experiment, member, window, direction)
        for member in members
    )
    return np.asarray(ratios, dtype=float)


def trace_norm_experiment(
    experiment: TraceExperiment,
    ensemble: EnsembleSpec = EnsembleSpec(),
    direction: str = TRACE,
    members: Optional[Sequence[WaveletCoeffs]] = None,
    workers: Optional[int] = None,
) -> TraceReport:
    """
    Norm ratios ``‖Tr f‖ / ‖f‖`` (``trace``) or ``‖Ext c‖ / ‖c‖`` (``ext``) over an
    ensemble, on the window and on the window refined by one scale.

    Random members are drawn from ``ensemble`` unless ``members`` is given; zero
    members are skipped. Violated theorem preconditions are reported and raised as
    ``UserWarning`` but do not stop the experiment.

    Parameters
    ----------
    experiment : TraceExperiment
        Spaces, weights, shift exponent, wavelet system and window.
    ensemble : EnsembleSpec
        Random members.
    direction : str
        ``"trace"`` or ``"ext"``.
    members : Optional[Sequence[WaveletCoeffs]]
        Explicit members; ``(n+1)``-dimensional for traces, ``n``-dimensional for
        extensions.
    workers : Optional[int]
        Parallel jobs over members.

    Returns
    -------
    TraceReport
    """
    if direction not in (TRACE, EXTENSION):
        raise ValueError(f"direction must be {TRACE!r} or {EXTENSION!r}")
    messages = experiment.diagnostics()
    for message in messages:
        warnings.warn(f"Trace theorem precondition: {message}", UserWarning)
    certificate = weight_compat_certificate(
        experiment.V,
        experiment.W,
        experiment.source.p,
        experiment.gamma,
        experiment.window,
        direction,
        quad=experiment.quad,
    )
    if members is None:
        members = _typed_members(experiment, ensemble, lifted=direction == TRACE)
    window = experiment.window
    ratios = _ratios(experiment, members, window, direction, workers)
    refined = _ratios(experiment, members, window.refined(), direction, workers)
    valid = ~np.isnan(ratios)
    skipped = int(np.sum(~valid))
    if not valid.any():
        logger.warning("Every ensemble member has zero norm")
        return TraceReport(
            direction, certificate, ratios, math.nan, math.nan, refined, math.nan,
            math.nan, skipped, messages,
        )
    max_ratio = float(np.nanmax(ratios))
    refined_max = float(np.nanmax(refined))
    drift = abs(refined_max - max_ratio) / max_ratio if max_ratio > 0 else 0.0
    logger.info(
        f"{direction} experiment: max ratio {max_ratio:.6g}, refined {refined_max:.6g}, "
        f"drift {drift:.3%}, skipped {skipped}"
    )
    return TraceReport(
        direction=direction,
        certificate=certificate,
        ratios=ratios,
        max_ratio=max_ratio,
        median_ratio=float(np.nanmedian(ratios)),
        refined_ratios=refined,
        refined_max_ratio=refined_max,
        drift=drift,
        skipped=skipped,
        warnings=messages,
    )


def sequence_to_coeffs(
    t: CoeffSequence, lam: Sequence[int], k: Optional[int] = None
) -> WaveletCoeffs:
    """Places a sequence on a single wavelet type ``λ``."""
    lam = tuple(int(b) for b in lam)
    return WaveletCoeffs({(lam, Q): v for Q, v in t.items()}, t.n, t.m, k)
