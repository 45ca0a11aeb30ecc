# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math
import warnings
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from sklearn.utils import check_random_state

from ..almostdiag import (
    AdEnvelope,
    BoundednessReport,
    EnvelopeFactory,
    IdentityFactory,
    empirical_boundedness,
    refinement_probe,
)
from ..lattice import DyadicCube
from ..matweight import estimate_dimensions, weight_from_config
from ..molecules import MoleculeGrid
from ..operators import (
    EXTENSION,
    TRACE,
    ProbeSet,
    TraceExperiment,
    czk_condition_residuals,
    czo_atom_image_experiment,
    czo_parameters,
    ext_coeffs,
    kernel_from_config,
    psido_molecule_experiment,
    sampled_psido,
    sequence_to_coeffs,
    symbol_class_residual,
    symbol_from_config,
    trace_coeffs,
    trace_norm_experiment,
)
from ..seqspace import (
    CoeffSequence,
    check_space_params,
    norm_breakdown,
    random_sequence,
    unweighted_layers,
    weighted_layers,
)
from ..wavelets import (
    WaveletSystem,
    build_bandlimited_pair,
    gram_residual,
    moment_residual,
    orthonormality_residual,
    scaling_integral,
    two_scale_residual,
    wavelet_types,
)
from .spec import ExperimentSpec, validate

logger = logging.getLogger(__name__)

Table = Tuple[Sequence[str], List[Sequence[Any]]]

IDENTITY = {"kind": "identity"}
ROUNDTRIP_SAMPLE = 20


class RunResult(NamedTuple):
    """
    Everything one experiment produces.

    ``results`` goes to the JSON report; ``tables`` maps file stems to
    ``(header, rows)``, with ``plot_`` stems holding curve data. ``warnings`` are the
    precondition diagnostics and every ``UserWarning`` raised while running.
    """

    kind: str
    results: Dict[str, Any]
    tables: Dict[str, Table]
    warnings: List[str]


def _cube_label(P: Optional[DyadicCube]) -> str:
    if P is None:
        return "window"
    return f"{P.j}:" + ",".join(str(k) for k in P.k)


def _ratio_rows(ratios: np.ndarray, refined: np.ndarray) -> List[Sequence[Any]]:
    return [
        (index, float(ratio), float(fine))
        for index, (ratio, fine) in enumerate(zip(ratios, refined))
    ]


def _refinement_rows(
    spec: ExperimentSpec, report: BoundednessReport
) -> List[Sequence[Any]]:
    return [
        (spec.window.j_max, report.max_ratio, report.median_ratio),
        (spec.window.j_max + 1, report.refined_max_ratio, report.refined_median_ratio),
    ]


def _quadrature_metadata(spec: ExperimentSpec) -> Dict[str, Any]:
    quad = spec.quadrature()
    return {"rule": quad.rule, "r": quad.r}


def run_norm(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    params = check_space_params(spec.space())
    records = spec.block("sequence").get("entries", [])
    t = CoeffSequence.from_json(records, spec.n, spec.m)
    quad = spec.quadrature()
    weighted = "weight" in spec.config
    if weighted:
        W = weight_from_config(spec.block("weight"), spec.n, spec.m)
        layers = weighted_layers(t, W, params, quad)
    else:
        layers = unweighted_layers(t, params)
    report = norm_breakdown(layers, params, spec.window, workers)

    by_scale: Dict[int, float] = {}
    for P, value in report.per_cube:
        j = spec.window.j_min if P is None else P.j
        by_scale[j] = max(by_scale.get(j, 0.0), value)
    return RunResult(
        kind=spec.kind,
        results={
            "norm": report.value,
            "weighted": weighted,
            "breakdown": report.to_dict(),
            "metadata": {"quadrature": _quadrature_metadata(spec), "support": len(t)},
        },
        tables={
            "norm_by_cube": (
                ("cube", "value"),
                [(_cube_label(P), value) for P, value in report.per_cube],
            ),
            "plot_norm_by_scale": (
                ("j", "max_value"),
                [(j, by_scale[j]) for j in sorted(by_scale)],
            ),
        },
        warnings=[],
    )


def _operator_factory(
    block: Dict[str, Any]
) -> Tuple[Callable[..., Any], Optional[AdEnvelope]]:
    kind = block.get("kind", "identity")
    scale = float(block.get("scale", 1.0))
    if kind == "identity":
        return IdentityFactory(scale), None
    if kind == "envelope":
        envelope = AdEnvelope(float(block["D"]), float(block["E"]), float(block["F"]))
        return EnvelopeFactory(envelope, scale), envelope
    raise ValueError(f"Unknown operator kind {kind!r}")


def run_adtest(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    params = check_space_params(spec.space())
    W = weight_from_config(spec.config.get("weight", IDENTITY), spec.n, spec.m)
    operator = spec.block("operator")
    factory, envelope = _operator_factory(operator)
    quad = spec.quadrature()
    limits = spec.thresholds()
    messages = []
    if envelope is not None and not (
        envelope.D > limits.D_star
        and envelope.E > limits.E_star
        and envelope.F > limits.F_star
    ):
        messages.append(
            f"envelope (D, E, F) = ({envelope.D}, {envelope.E}, {envelope.F}) is not "
            f"above the thresholds ({limits.D_star:.6g}, {limits.E_star:.6g}, "
            f"{limits.F_star:.6g})"
        )
    report = empirical_boundedness(
        factory, W, params, spec.ensemble(), spec.window, quad, workers=workers
    )
    results: Dict[str, Any] = {
        "operator": dict(operator),
        "thresholds": limits._asdict(),
        "max_ratio": report.max_ratio,
        "median_ratio": report.median_ratio,
        "refined_max_ratio": report.refined_max_ratio,
        "refined_median_ratio": report.refined_median_ratio,
        "drift": report.drift,
        "skipped": report.skipped,
        "metadata": {
            "quadrature": _quadrature_metadata(spec),
            "ensemble": spec.ensemble()._asdict(),
        },
    }
    tables: Dict[str, Table] = {
        "ratios": (
            ("member", "ratio", "refined_ratio"),
            _ratio_rows(report.ratios, report.refined_ratios),
        ),
        "plot_refinement": (
            ("j_max", "max_ratio", "median_ratio"),
            _refinement_rows(spec, report),
        ),
    }
    refinements = int(operator.get("refinements", 0))
    if envelope is not None and refinements > 0:
        probe = refinement_probe(W, params, envelope, spec.window, refinements, quad)
        results["probe"] = {"j_max": probe.j_max, "ratios": probe.ratios}
        tables["plot_probe"] = (("j_max", "ratio"), list(zip(probe.j_max, probe.ratios)))
    return RunResult(spec.kind, results, tables, messages)


def run_dims(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    W = weight_from_config(spec.block("weight"), spec.n, spec.m)
    p = float(spec.block("space").get("p", 2.0))
    lambdas = [float(value) for value in spec.block("dims").get("lambdas", [1, 2, 4, 8])]
    quad = spec.quadrature()
    pair = estimate_dimensions(W, p, spec.window, lambdas, quad=quad, workers=workers)

    def summary(estimate: Any) -> Dict[str, Any]:
        return {
            "value": estimate.value,
            "residual": estimate.residual,
            "cube": estimate.cube.to_dict(),
        }

    rows, best_rows = [], []
    for estimate in (pair.lower, pair.upper):
        best = estimate.cubes.index(estimate.cube)
        for c, Q in enumerate(estimate.cubes):
            for index, lam in enumerate(estimate.lambdas):
                value = float(estimate.table[c, index])
                rows.append((estimate.side, _cube_label(Q), float(lam), value))
                if c == best:
                    best_rows.append((estimate.side, float(lam), value))
    return RunResult(
        kind=spec.kind,
        results={
            "d_lower_hat": pair.d_lower_hat,
            "d_upper_hat": pair.d_upper_hat,
            "lower": summary(pair.lower),
            "upper": summary(pair.upper),
            "metadata": {"quadrature": _quadrature_metadata(spec), "lambdas": lambdas},
        },
        tables={
            "dimension_table": (("side", "cube", "lambda", "value"), rows),
            "plot_dimension_fit": (("side", "lambda", "value"), best_rows),
        },
        warnings=[],
    )


def _wavelet_system(spec: ExperimentSpec, n: int) -> WaveletSystem:
    block = spec.block("wavelet")
    return WaveletSystem(
        int(block.get("k", 1)),
        int(block.get("levels", 10)),
        n,
        block.get("cache_dir"),
    )


def trace_experiment(spec: ExperimentSpec) -> TraceExperiment:
    """Builds the trace or extension experiment a ``trace``/``ext`` spec describes."""
    n, m = spec.n, spec.m
    block = spec.block("trace")
    if "gamma" not in block:
        raise ValueError("The trace block needs the shift exponent 'gamma'")
    return TraceExperiment(
        source=spec.space(),
        W=weight_from_config(spec.config.get("weight", IDENTITY), n + 1, m),
        V=weight_from_config(block.get("target_weight", IDENTITY), n, m),
        gamma=float(block["gamma"]),
        system=_wavelet_system(spec, n + 1),
        window=spec.window,
        d_upper=spec.dimensions()["d_upper"],
        quad=spec.quadrature(),
    )


def roundtrip_residual(
    experiment: TraceExperiment, seed: int, count: int = ROUNDTRIP_SAMPLE
) -> float:
    """
    ``max ‖Tr Ext c - c‖_∞ / ‖c‖_∞`` over ``count`` random single-type sequences on the
    window.
    """
    window = experiment.window
    system = experiment.system
    k0 = system.k0
    types = wavelet_types(window.n)
    rng = check_random_state(seed)
    residual = 0.0
    for index in range(count):
        support = min(int(rng.randint(1, 9)), len(window.all_cubes()))
        t = random_sequence(window, support, experiment.source.m, rng)
        c = sequence_to_coeffs(t, types[index % len(types)], system.k)
        back = trace_coeffs(ext_coeffs(c, k0.k0, k0.value), system, window)
        scale = c.max_abs()
        if scale > 0:
            residual = max(residual, (back - c).max_abs() / scale)
    logger.info(f"Tr Ext round trip residual {residual:.3e} over {count} sequences")
    return residual


def run_trace(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    experiment = trace_experiment(spec)
    check_space_params(experiment.source)
    direction = TRACE if spec.kind == "trace" else EXTENSION
    ensemble = spec.ensemble()
    report = trace_norm_experiment(experiment, ensemble, direction, workers=workers)
    residual = roundtrip_residual(experiment, ensemble.seed)
    target = experiment.target()
    results = report.to_dict()
    del results["warnings"]
    results.update(
        {
            "gamma": experiment.gamma,
            "target": target.to_dict(),
            "roundtrip_residual": residual,
            "k0": {"k0": experiment.system.k0.k0, "value": experiment.system.k0.value},
            "metadata": {
                "quadrature": _quadrature_metadata(spec),
                "ensemble": ensemble._asdict(),
                "wavelet": {"k": experiment.system.k, "levels": experiment.system.levels},
                "roundtrip_sequences": ROUNDTRIP_SAMPLE,
            },
        }
    )
    valid = ~np.isnan(report.ratios)
    return RunResult(
        kind=spec.kind,
        results=results,
        tables={
            "ratios": (
                ("member", "ratio", "refined_ratio"),
                _ratio_rows(report.ratios, report.refined_ratios),
            ),
            "plot_refinement": (
                ("j_max", "max_ratio", "median_ratio"),
                [
                    (
                        spec.window.j_max,
                        report.max_ratio,
                        report.median_ratio,
                    ),
                    (
                        spec.window.j_max + 1,
                        report.refined_max_ratio,
                        float(np.nanmedian(report.refined_ratios)) if valid.any() else math.nan,
                    ),
                ],
            ),
        },
        warnings=list(report.warnings),
    )


def run_psido(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    sym = symbol_from_config(spec.block("symbol"), 1)
    block = spec.block("molecule")
    pair_block = spec.block("bandlimited")
    pair = build_bandlimited_pair(
        int(pair_block.get("points_per_octave", 256)), int(pair_block.get("octaves", 4))
    )
    scales = [int(j) for j in block.get("scales", [0, 1, 2])]
    grid = MoleculeGrid(
        radius=float(block.get("radius", 6.0)),
        level=int(block.get("level", 6)),
        workers=workers,
    )
    F_star = spec.thresholds().F_star if "space" in spec.config else None
    cubes = [DyadicCube(j, (0,)) for j in scales]
    report = psido_molecule_experiment(
        sym, pair, cubes, float(block.get("M", 2.0)), float(block.get("N", 0.0)), grid, F_star
    )
    probes = ProbeSet(1, int(block.get("probes", 1000)), int(spec.seed or 0))
    alpha_max = int(block.get("alpha_max", 2))
    beta_max = int(block.get("beta_max", 2))
    residual = symbol_class_residual(sym, sym.order, alpha_max, beta_max, probes)
    points, values = sampled_psido(sym, pair, cubes[0], level=grid.level)
    results = report.to_dict()
    results.update(
        {
            "symbol_class_residual": residual,
            "metadata": {
                "grid": {"radius": grid.radius, "level": grid.level, "tol": grid.tol},
                "probes": probes._asdict(),
                "alpha_max": alpha_max,
                "beta_max": beta_max,
                "bandlimited": {
                    "points_per_octave": pair.points_per_octave,
                    "octaves": pair.octaves,
                },
            },
        }
    )
    return RunResult(
        kind=spec.kind,
        results=results,
        tables={
            "constants": (
                ("j", "constant"),
                [(Q.j, report.constants[Q]) for Q in cubes],
            ),
            "plot_psido": (
                ("x", "re", "im"),
                [
                    (float(x), float(v.real), float(v.imag))
                    for x, v in zip(np.ravel(points), values)
                ],
            ),
        },
        warnings=[],
    )


def run_czo(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    K = kernel_from_config(spec.block("kernel"))
    block = spec.block("czo")
    limits = spec.thresholds()
    parameters = czo_parameters(limits, K.n, block.get("E"), block.get("F"))
    messages = list(parameters.diagnostics())
    probes = ProbeSet(K.n, int(block.get("probes", 1000)), int(spec.seed or 0))
    residuals = czk_condition_residuals(
        K, parameters.E, parameters.F, parameters.sigma, probes
    )
    results: Dict[str, Any] = {
        "parameters": parameters.to_dict(),
        "kernel_residuals": residuals.to_dict(),
        "metadata": {"probes": probes._asdict()},
    }
    tables: Dict[str, Table] = {
        "kernel_constants": (
            ("condition", "constant"),
            [(name, value) for name, value in sorted(residuals.constants.items())],
        )
    }
    if K.n == 1:
        grid = MoleculeGrid(
            radius=float(block.get("radius", 6.0)),
            level=int(block.get("level", 6)),
            workers=workers,
        )
        scales = [int(j) for j in block.get("scales", [0, 1, 2])]
        report = czo_atom_image_experiment(
            K, limits, scales, block.get("E"), block.get("F"), grid,
            level=int(block.get("quadrature_level", 8)),
        )
        results["atom_images"] = report.to_dict()
        results["metadata"]["grid"] = {"radius": grid.radius, "level": grid.level, "tol": grid.tol}
        tables["plot_atom_images"] = (
            ("j", "constant", "decay_exponent", "integral_residual"),
            [
                (image.cube.j, image.constant, image.decay_exponent, image.integral_residual)
                for image in report.images
            ],
        )
        tables["reduced_moments"] = (
            ("moments", "decay_exponent"),
            list(zip(report.reduced_moments, report.reduced_decay_exponents)),
        )
        if not report.reduced_monotone:
            messages.append("far-field decay does not fall as atom moments are removed")
    else:
        logger.info(f"Atom images are computed for n = 1 only; skipped for n = {K.n}")
    return RunResult(spec.kind, results, tables, messages)


def run_wavelet_check(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    system = _wavelet_system(spec, spec.n)
    level = system.levels
    checks = {
        "orthonormality": orthonormality_residual(system.filters.h),
        "two_scale": two_scale_residual(system.filters, system.samples, level),
        "gram": gram_residual(system, spec.window),
        "moments": moment_residual(system),
        "scaling_integral": abs(scaling_integral(system) - 1.0),
    }
    grid = system.samples.grid(level)
    stride = max(1, len(grid) // 512)
    return RunResult(
        kind=spec.kind,
        results={
            "k": system.k,
            "checks": checks,
            "k0": {"k0": system.k0.k0, "value": system.k0.value},
            "metadata": {"levels": level, "window": spec.window.to_dict()},
        },
        tables={
            "checks": (("check", "residual"), sorted(checks.items())),
            "plot_wavelet": (
                ("x", "phi", "psi"),
                [
                    (float(x), float(phi), float(psi))
                    for x, phi, psi in zip(
                        grid[::stride],
                        system.samples.phi[level][::stride],
                        system.samples.psi[level][::stride],
                    )
                ],
            ),
        },
        warnings=[],
    )


RUNNERS: Dict[str, Callable[[ExperimentSpec, Optional[int]], RunResult]] = {
    "norm": run_norm,
    "adtest": run_adtest,
    "dims": run_dims,
    "trace": run_trace,
    "ext": run_trace,
    "psido": run_psido,
    "czo": run_czo,
    "wavelet-check": run_wavelet_check,
}


def _unique(messages: Sequence[str]) -> List[str]:
    seen: Dict[str, None] = {}
    for message in messages:
        seen.setdefault(message, None)
    return list(seen)


def run(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    """
    Runs one experiment.

    The spec is validated first; its diagnostics, the runner's own precondition
    messages and every ``UserWarning`` raised on the way end up in
    :attr:`RunResult.warnings`. Errors propagate.

    Parameters
    ----------
    spec : ExperimentSpec
    workers : Optional[int]
        joblib workers for the parallel sections, capped by ``DMS_THREADS``.

    Returns
    -------
    RunResult
    """
    diagnostics = validate(spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UserWarning)
        result = RUNNERS[spec.kind](spec, workers)
    raised = [
        str(warning.message)
        for warning in caught
        if issubclass(warning.category, UserWarning)
    ]
    messages = _unique(list(diagnostics) + list(result.warnings) + raised)
    for message in messages:
        logger.warning(message)
    logger.info(f"Finished {spec.kind} experiment with {len(messages)} warnings")
    return result._replace(warnings=messages)
