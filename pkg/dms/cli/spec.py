# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Union

from ..almostdiag import EnsembleSpec, Thresholds, thresholds
from ..growth import growth_from_config
from ..lattice import LatticeWindow, check_window
from ..matweight import QuadratureSpec, check_quadrature
from ..seqspace import SpaceParams, space_params_diagnostics
from ..wavelets import minimal_wavelet_order

logger = logging.getLogger(__name__)

KINDS = ("norm", "adtest", "dims", "trace", "ext", "psido", "czo", "wavelet-check")
ENSEMBLE_KINDS = ("adtest", "trace", "ext")
TRACE_KINDS = ("trace", "ext")

# blocks each kind needs on top of "kind" and "window"
REQUIRED_BLOCKS = {
    "norm": ("space", "sequence"),
    "adtest": ("space", "operator", "ensemble"),
    "dims": ("weight", "space"),
    "trace": ("space", "trace", "wavelet", "ensemble"),
    "ext": ("space", "trace", "wavelet", "ensemble"),
    "psido": ("symbol", "molecule"),
    "czo": ("kernel", "space", "czo"),
    "wavelet-check": ("wavelet",),
}


class ExperimentSpec(NamedTuple):
    """
    A parsed experiment document.

    ``n`` and ``m`` are the dimension and matrix size of the space the experiment
    runs in; for ``trace`` and ``ext`` the space block describes the
    ``(n + 1)``-dimensional source and ``window`` the ``n``-dimensional target.
    ``config`` keeps the whole document for provenance.
    """

    kind: str
    window: LatticeWindow
    n: int
    m: int
    seed: Optional[int]
    config: Dict[str, Any]

    def block(self, name: str) -> Dict[str, Any]:
        value = self.config.get(name, {})
        if not isinstance(value, dict):
            raise ValueError(f"Block {name!r} must be an object")
        return value

    @property
    def space_dimension(self) -> int:
        return self.n + 1 if self.kind in TRACE_KINDS else self.n

    def space(self) -> SpaceParams:
        """The (unvalidated) space parameters of the ``space`` block."""
        block = self.block("space")
        n = self.space_dimension
        growth = growth_from_config(block.get("growth", {"kind": "unit"}), n, self.window.with_dimension(n))
        return SpaceParams(
            family=str(block.get("family", "B")).upper(),
            s=float(block.get("s", 0.0)),
            p=float(block.get("p", 2.0)),
            q=_parse_exponent(block.get("q", 2.0)),
            growth=growth,
            n=n,
            m=self.m,
        )

    def dimensions(self) -> Dict[str, float]:
        block = self.block("dimensions")
        return {
            "d_lower": float(block.get("d_lower", 0.0)),
            "d_upper": float(block.get("d_upper", 0.0)),
        }

    def thresholds(self) -> Thresholds:
        dims = self.dimensions()
        return thresholds(self.space(), dims["d_lower"], dims["d_upper"])

    def ensemble(self) -> EnsembleSpec:
        block = self.block("ensemble")
        scales = block.get("scales")
        return EnsembleSpec(
            size=int(block.get("size", 50)),
            support_size=int(block.get("support_size", 8)),
            seed=int(self.seed if self.seed is not None else 0),
            scales=None if scales is None else (int(scales[0]), int(scales[1])),
        )

    def quadrature(self) -> QuadratureSpec:
        block = self.block("quadrature")
        return check_quadrature(
            QuadratureSpec(str(block.get("rule", "midpoint")), int(block.get("r", 5)))
        )


def _parse_exponent(value: Union[str, float, int]) -> float:
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        raise ValueError(f"Exponent {value!r} is neither a number nor 'inf'")
    return float(value)


def _parse_window(value: Any, n: int) -> LatticeWindow:
    if isinstance(value, str):
        return LatticeWindow.from_string(value, n)
    if isinstance(value, dict):
        return check_window(
            LatticeWindow(
                int(value.get("j_min", -3)),
                int(value.get("j_max", 6)),
                n,
                int(value.get("box", 3)),
            )
        )
    raise ValueError(f"Window must be a string j_min:j_max:box or an object, got {value!r}")


def schema_errors(document: Any) -> List[str]:
    """Structural problems of an experiment document; empty when well formed."""
    if not isinstance(document, dict):
        return ["the experiment document must be a JSON object"]
    errors = []
    kind = document.get("kind")
    if kind not in KINDS:
        errors.append(f"kind must be one of {list(KINDS)}, got {kind!r}")
        return errors
    if "window" not in document:
        errors.append("missing block 'window'")
    for name in REQUIRED_BLOCKS[kind]:
        if name not in document:
            errors.append(f"kind {kind!r} needs block {name!r}")
    if kind in ENSEMBLE_KINDS and not isinstance(document.get("seed"), int):
        errors.append(f"kind {kind!r} needs an integer 'seed'")
    for key in ("n", "m"):
        if key in document and (not isinstance(document[key], int) or document[key] < 1):
            errors.append(f"{key!r} must be a positive integer")
    return errors


def parse_spec(
    document: Dict[str, Any], window: Optional[str] = None
) -> ExperimentSpec:
    """
    Builds an :class:`ExperimentSpec` from a decoded document, with an optional
    ``j_min:j_max:box`` window override.

    Raises
    ------
    ValueError
        Listing every structural problem of the document.
    """
    errors = schema_errors(document)
    if errors:
        raise ValueError("Invalid experiment spec: " + "; ".join(errors))
    n = int(document.get("n", 1))
    m = int(document.get("m", 1))
    resolved = _parse_window(window if window is not None else document["window"], n)
    config = dict(document)
    config["window"] = resolved.to_dict()
    seed = document.get("seed")
    return ExperimentSpec(
        kind=document["kind"],
        window=resolved,
        n=n,
        m=m,
        seed=None if seed is None else int(seed),
        config=config,
    )


def load_spec(
    path: Union[str, Path], window: Optional[str] = None
) -> ExperimentSpec:
    """Reads and parses an experiment document from a JSON file."""
    with open(path, "r") as spec_io:
        try:
            document = json.load(spec_io)
        except json.JSONDecodeError as error:
            raise ValueError(f"{path} is not valid JSON: {error}")
    spec = parse_spec(document, window)
    logger.info(f"Loaded {spec.kind} experiment from {path} on {spec.window}")
    return spec


def validate(spec: ExperimentSpec) -> List[str]:
    """
    Mathematical diagnostics of a parsed spec, without running it: admissible range
    of the growth class, the minimal wavelet order, the trace smoothness threshold and
    the Calderón-Zygmund orders. Never raises for invalid values; each problem becomes
    a message.
    """
    from ..operators import czo_parameters

    messages: List[str] = []
    try:
        space = spec.space() if "space" in spec.config else None
    except (ValueError, KeyError, TypeError) as error:
        return [f"space: {error}"]
    if space is not None:
        messages.extend(f"space: {message}" for message in space_params_diagnostics(space))
    if messages or space is None:
        return messages

    try:
        limits = spec.thresholds()
    except ValueError as error:
        return [f"dimensions: {error}"]

    if "wavelet" in spec.config and spec.kind != "wavelet-check":
        k = int(spec.block("wavelet").get("k", 1))
        bound = minimal_wavelet_order(limits.E_star, limits.F_star, space.n)
        if k < bound:
            messages.append(
                f"wavelet: k={k} is below the minimal order {bound} for "
                f"E*={limits.E_star:.6g}, F*={limits.F_star:.6g}"
            )

    if spec.kind in TRACE_KINDS:
        from .runner import trace_experiment

        try:
            experiment = trace_experiment(spec)
        except ValueError as error:
            messages.append(f"trace: {error}")
        else:
            messages.extend(f"trace: {message}" for message in experiment.diagnostics())

    if spec.kind == "czo":
        block = spec.block("czo")
        parameters = czo_parameters(limits, space.n, block.get("E"), block.get("F"))
        messages.extend(f"czo: {message}" for message in parameters.diagnostics())

    for message in messages:
        logger.warning(message)
    return messages
