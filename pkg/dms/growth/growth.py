# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from ..lattice import (
    DyadicCube,
    LatticeWindow,
    cubes_to_array,
    lift,
    pairwise_scaled_distance,
    scaled_distance,
)
from ..matweight import MatrixWeight, QuadratureSpec, weight_from_config

logger = logging.getLogger(__name__)


class GrowthClass(NamedTuple):
    """The parameters ``(δ₁, δ₂; ω)`` of a growth function class."""

    delta1: float
    delta2: float
    omega: float


class GrowthFunction:
    """
    A positive function ``υ`` on dyadic cubes with a declared class
    ``G(δ₁, δ₂; ω)``.

    Parameters
    ----------
    evaluator : Callable[[DyadicCube], float]
        Returns ``υ(Q)``.
    growth_class : GrowthClass
        The declared ``(δ₁, δ₂; ω)``.
    n : int
        Dimension of the cubes ``υ`` is defined on.
    label : str
        Short description used in reports.
    """

    def __init__(
        self,
        evaluator: Callable[[DyadicCube], float],
        growth_class: GrowthClass,
        n: int,
        label: str,
    ):
        self.evaluator = evaluator
        self.growth_class = GrowthClass(*growth_class)
        self.n = n
        self.label = label

    def __call__(self, Q: DyadicCube) -> float:
        value = float(self.evaluator(Q))
        if not value > 0:
            raise ValueError(f"Growth function {self.label} is not positive on {Q}")
        return value

    def values(self, cubes: Sequence[DyadicCube]) -> np.ndarray:
        return np.array([self(Q) for Q in cubes], dtype=float)

    def scaled(self, c: float) -> "GrowthFunction":
        """``c·υ``, which lies in the same class."""
        if c <= 0:
            raise ValueError(f"Scale factor must be positive, got {c}")
        return GrowthFunction(
            lambda Q: c * self.evaluator(Q), self.growth_class, self.n, f"{c}*{self.label}"
        )

    def __repr__(self) -> str:
        delta1, delta2, omega = self.growth_class
        return f"GrowthFunction({self.label}, class=({delta1}, {delta2}; {omega}))"


def growth_bound_rhs(
    Q: DyadicCube, R: DyadicCube, delta1: float, delta2: float, omega: float
) -> float:
    """
    ``(1 + |x_Q - x_R| / max(ℓ(Q), ℓ(R)))^ω (|Q|/|R|)^δ`` with ``δ = δ₁`` when
    ``ℓ(Q) <= ℓ(R)`` and ``δ = δ₂`` otherwise.

    >>> growth_bound_rhs(DyadicCube(1, (0,)), DyadicCube(0, (0,)), 1.0, 0.0, 0.0)
    0.5
    """
    exponent = delta1 if Q.side <= R.side else delta2
    return scaled_distance(Q, R) ** omega * (Q.volume / R.volume) ** exponent


def _pairwise_rhs(
    cubes: Sequence[DyadicCube], delta1: float, delta2: float, omega: float
) -> np.ndarray:
    scales, _ = cubes_to_array(cubes)
    n = cubes[0].n
    volume_ratio = np.exp2(-n * (scales[:, None] - scales[None, :]).astype(float))
    exponent = np.where(scales[:, None] >= scales[None, :], delta1, delta2)
    return pairwise_scaled_distance(cubes, cubes) ** omega * volume_ratio ** exponent


def certify_membership(
    upsilon: GrowthFunction,
    window: LatticeWindow,
    delta1: float,
    delta2: float,
    omega: float,
    cubes: Optional[Sequence[DyadicCube]] = None,
) -> float:
    """
    Smallest empirical ``C`` with ``υ(Q)/υ(R) <= C · growth_bound_rhs(Q, R)`` over
    all pairs of window cubes.

    Parameters
    ----------
    upsilon : GrowthFunction
        The function to certify.
    window : LatticeWindow
        The pairs run over its cubes unless ``cubes`` is given.
    delta1, delta2, omega : float
        The class to certify against.
    cubes : Optional[Sequence[DyadicCube]]
        Explicit cube set.

    Returns
    -------
    float
        The certificate; it can only grow with the cube set.
    """
    cubes = list(window.all_cubes() if cubes is None else cubes)
    if len(cubes) == 0:
        raise ValueError("No cubes to certify over")
    values = upsilon.values(cubes)
    ratios = values[:, None] / values[None, :]
    certificate = float((ratios / _pairwise_rhs(cubes, delta1, delta2, omega)).max())
    logger.info(
        f"{upsilon.label} certified in G({delta1}, {delta2}; {omega}) with "
        f"C={certificate:.6g} over {len(cubes)} cubes"
    )
    return certificate


def restrict_growth(upsilon: GrowthFunction) -> GrowthFunction:
    """
    The trace restriction ``υ⁽ⁿ⁾(Q') = υ⁽ⁿ⁺¹⁾(P(Q', 0))``, declared in the class
    ``((n+1)/n δ₁, (n+1)/n δ₂; ω)``.
    """
    if upsilon.n < 2:
        raise ValueError("Only growth functions in dimension >= 2 can be restricted")
    n = upsilon.n - 1
    factor = (n + 1) / n
    delta1, delta2, omega = upsilon.growth_class
    return GrowthFunction(
        lambda Qp: upsilon(lift(Qp, 0)),
        GrowthClass(factor * delta1, factor * delta2, omega),
        n,
        f"restrict({upsilon.label})",
    )


def growth_class_diagnostics(
    delta1: float, delta2: float, omega: float, n: int
) -> List[str]:
    """
    Messages for every violated condition of the admissible range
    ``δ₂ >= 0``, ``δ₁ <= δ₂`` and ``0 <= ω <= n(δ₂ - δ₁)``. Empty when admissible.
    """
    messages = []
    if delta2 < 0:
        messages.append(f"growth class needs delta2 >= 0, got {delta2}")
    if delta1 > delta2:
        messages.append(f"growth class needs delta1 <= delta2, got {delta1} > {delta2}")
    if omega < 0:
        messages.append(f"growth class needs omega >= 0, got {omega}")
    if omega > n * (delta2 - delta1):
        messages.append(
            f"growth class needs omega <= n(delta2 - delta1) = {n * (delta2 - delta1)}, "
            f"got {omega}"
        )
    return messages


def power_growth(tau: float, n: int = 1) -> GrowthFunction:
    """``υ(Q) = |Q|^τ`` in ``G(τ, τ; 0)``."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return GrowthFunction(
        lambda Q: Q.volume ** tau, GrowthClass(tau, tau, 0.0), n, f"power(tau={tau})"
    )


def unit_growth(n: int = 1) -> GrowthFunction:
    """``υ ≡ 1``."""
    return GrowthFunction(lambda Q: 1.0, GrowthClass(0.0, 0.0, 0.0), n, "unit")


SATURATING = "saturating"
POWER = "power"


def g_of_ell_growth(
    p: float, n: int = 1, form: str = SATURATING, a: Optional[float] = None
) -> GrowthFunction:
    """
    ``υ(Q) = g(ℓ(Q))`` for a nondecreasing ``g`` with ``g(t) t^{-n/p}``
    nonincreasing, which puts ``υ`` in ``G(0, 1/p; 0)``.

    ``form="saturating"`` uses ``g(t) = min(t, 1)^{n/p}``; ``form="power"`` uses
    ``g(t) = t^a`` with ``0 <= a <= n/p``.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if form == SATURATING:
        g: Callable[[float], float] = lambda t: min(t, 1.0) ** (n / p)  # noqa: E731
        label = "g_of_ell(saturating)"
    elif form == POWER:
        if a is None or a < 0 or a > n / p:
            raise ValueError(f"power form needs 0 <= a <= n/p = {n / p}, got {a}")
        g = lambda t: t ** a  # noqa: E731
        label = f"g_of_ell(power, a={a})"
    else:
        raise ValueError(f"Unknown g_of_ell form {form!r}")
    return GrowthFunction(lambda Q: g(Q.side), GrowthClass(0.0, 1.0 / p, 0.0), n, label)


def weight_integral_growth(
    w: MatrixWeight,
    growth_class: GrowthClass,
    quad: QuadratureSpec = QuadratureSpec(),
) -> GrowthFunction:
    """``υ(Q) = ∫_Q w`` for a scalar weight ``w``, by tensor quadrature."""
    if w.m != 1:
        raise ValueError("weight_integral growth needs a scalar weight")

    def integral(Q: DyadicCube) -> float:
        points, weights = quad.cube_nodes(Q)
        return Q.volume * float(weights @ w.evaluate(points)[:, 0, 0])

    return GrowthFunction(integral, growth_class, w.n, f"weight_integral({w.label})")


class ClassSearch(NamedTuple):
    """
    Grid search for the class ``G(δ, p; n(p - δ))`` of a weight integral growth
    function. ``table`` rows are ``(δ, p, ω, C)``; ``best`` is the admissible row
    with the smallest ``ω`` (``None`` if no row stays under the cap).
    """

    table: np.ndarray
    best: Optional[GrowthClass]
    certificate: float


def search_weight_integral_class(
    w: MatrixWeight,
    window: LatticeWindow,
    deltas: Sequence[float] = (0.1, 0.25, 0.5, 0.75, 0.9),
    ps: Sequence[float] = (1.0, 1.5, 2.0, 3.0, 4.0),
    c_max: float = 100.0,
    quad: QuadratureSpec = QuadratureSpec(),
    cubes: Optional[Sequence[DyadicCube]] = None,
) -> ClassSearch:
    """
    Searches ``(δ, p)`` pairs for the weight integral ``υ(Q) = ∫_Q w``. The pair is
    only known to exist, so the search reports what it finds and never claims a
    tight class.
    """
    upsilon = weight_integral_growth(w, GrowthClass(0.0, 0.0, 0.0), quad)
    cubes = list(window.all_cubes() if cubes is None else cubes)
    values = upsilon.values(cubes)
    ratios = values[:, None] / values[None, :]
    rows = []
    for delta in deltas:
        for p in ps:
            omega = w.n * (p - delta)
            certificate = float((ratios / _pairwise_rhs(cubes, delta, p, omega)).max())
            rows.append((delta, p, omega, certificate))
    table = np.asarray(rows, dtype=float)
    admissible = table[table[:, 3] <= c_max]
    if len(admissible) == 0:
        logger.warning(f"No (delta, p) pair certified {upsilon.label} under C={c_max}")
        return ClassSearch(table=table, best=None, certificate=float("inf"))
    order = np.lexsort((admissible[:, 3], admissible[:, 2]))
    delta, p, omega, certificate = admissible[order[0]]
    return ClassSearch(
        table=table, best=GrowthClass(delta, p, omega), certificate=float(certificate)
    )


def table_growth(
    source: Union[str, Path, Dict[DyadicCube, float]],
    growth_class: GrowthClass,
    n: int = 1,
) -> GrowthFunction:
    """
    Tabulated ``υ``. A CSV source has rows ``j, k_1, ..., k_n, value``.
    """
    if isinstance(source, dict):
        values = dict(source)
    else:
        with open(source) as csv_file:
            table = np.loadtxt(csv_file, delimiter=",", comments="#", ndmin=2)
        if table.shape[1] != n + 2:
            raise ValueError(
                f"Growth table rows need {n + 2} fields, got shape {table.shape}"
            )
        indices = table[:, :-1].astype(int)
        values = {
            DyadicCube(int(row[0]), tuple(int(ki) for ki in row[1:])): float(value)
            for row, value in zip(indices, table[:, -1])
        }

    def lookup(Q: DyadicCube) -> float:
        try:
            return values[Q]
        except KeyError:
            raise ValueError(f"Growth table has no entry for {Q}")

    return GrowthFunction(lookup, growth_class, n, f"table({len(values)} cubes)")


def _growth_from_kind(
    config: Dict[str, Any],
    n: int,
    window: Optional[LatticeWindow],
) -> GrowthFunction:
    kind = config.get("kind", "unit")
    if kind == "unit":
        return unit_growth(n)
    if kind == "power":
        return power_growth(float(config["tau"]), n)
    if kind == "g_of_ell":
        return g_of_ell_growth(
            float(config["p"]), n, config.get("form", SATURATING), config.get("a")
        )
    if kind == "weight_integral":
        w = weight_from_config(config["weight"], n, 1)
        if "delta" in config and "p" in config:
            delta, p = float(config["delta"]), float(config["p"])
            growth_class = GrowthClass(delta, p, n * (p - delta))
        else:
            if window is None:
                raise ValueError("weight_integral growth needs delta and p or a window")
            search = search_weight_integral_class(w, window)
            if search.best is None:
                raise ValueError("No class found for the weight_integral growth")
            growth_class = search.best
        return weight_integral_growth(w, growth_class)
    if kind == "table":
        return table_growth(config["path"], GrowthClass(*config["class"]), n)
    raise ValueError(f"Unknown growth kind {kind!r}")


def growth_from_config(
    config: Dict[str, Any],
    n: int,
    window: Optional[LatticeWindow] = None,
) -> GrowthFunction:
    """
    Builds a growth function from its JSON description: ``unit``, ``power``
    (``tau``), ``g_of_ell`` (``p``, ``form``, ``a``), ``weight_integral``
    (``weight``, and ``delta``/``p`` or a search over ``window``) or ``table``
    (``path``, ``class``).

    Any kind may carry ``"class": [δ₁, δ₂, ω]`` to declare another class than the
    one derived for it; the declaration is not checked here, see
    :func:`growth_class_diagnostics` and :func:`certify_membership`.
    """
    growth = _growth_from_kind(config, n, window)
    declared = config.get("class")
    if declared is not None and config.get("kind") != "table":
        growth = GrowthFunction(
            growth.evaluator, GrowthClass(*declared), n, growth.label
        )
    return growth
