# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math
from typing import NamedTuple

from ..seqspace import B_FAMILY, F_FAMILY, SpaceParams

logger = logging.getLogger(__name__)

SUPERCRITICAL = "supercritical"
CRITICAL = "critical"
SUBCRITICAL = "subcritical"


class JIndex(NamedTuple):
    value: float
    case: str


class Thresholds(NamedTuple):
    """
    The thresholds above which every ``(D, E, F)``-almost diagonal operator is
    bounded on the weighted space, and the intermediate ``J`` and ``Δ``.
    """

    J: float
    Delta: float
    D_star: float
    E_star: float
    F_star: float
    case: str

    def margin(self, D: float, E: float, F: float) -> float:
        """Smallest of ``D - D*``, ``E - E*`` and ``F - F*``; positive when above."""
        return min(D - self.D_star, E - self.E_star, F - self.F_star)


def _family(family: str) -> str:
    family = family.upper()
    if family not in (B_FAMILY, F_FAMILY):
        raise ValueError(f"family must be 'B' or 'F', got {family!r}")
    return family


def j_index(
    family: str, p: float, q: float, delta1: float, delta2: float, n: int = 1
) -> JIndex:
    """
    The index ``J`` with its case label.

    Overlapping boundary cases are resolved in the order supercritical, critical,
    subcritical; equality with ``1/p`` is decided with :func:`math.isclose`.

    Examples
    --------
    >>> j_index("F", 2.0, 0.5, 0.5, 0.5)
    JIndex(value=2.0, case='critical')
    """
    family = _family(family)
    if not p > 0 or math.isinf(p):
        raise ValueError(f"p must lie in (0, inf), got {p}")
    critical_delta1 = math.isclose(delta1, 1.0 / p)
    if (delta1 > 1.0 / p and not critical_delta1) or (
        critical_delta1 and math.isinf(q)
    ):
        result = JIndex(float(n), SUPERCRITICAL)
    elif (
        family == F_FAMILY
        and critical_delta1
        and math.isclose(delta2, 1.0 / p)
        and not math.isinf(q)
    ):
        result = JIndex(n / min(1.0, q), CRITICAL)
    else:
        gamma = p if family == B_FAMILY else min(p, q)
        result = JIndex(n / min(1.0, gamma), SUBCRITICAL)
    logger.info(
        f"J index for {family}(p={p}, q={q}, delta1={delta1}, delta2={delta2}) "
        f"matched the {result.case} case: J={result.value}"
    )
    return result


def thresholds(params: SpaceParams, d_lower: float, d_upper: float) -> Thresholds:
    """
    ``D*``, ``E*`` and ``F*`` for the space ``params`` and a weight with
    ``A_{p,∞}`` dimensions ``d_lower`` and ``d_upper``.

    Parameters
    ----------
    params : SpaceParams
        The space, including the growth class ``(δ₁, δ₂; ω)`` of ``υ``.
    d_lower : float
        Lower dimension, in ``[0, n)``.
    d_upper : float
        Upper dimension, nonnegative.

    Returns
    -------
    Thresholds

    Notes
    -----
    With ``Δ = [δ₂ - 1/p + d_lower/(np)]₊``:

    - ``D* = J + min(nΔ, ω + d_lower/p) + d_upper/p``
    - ``E* = n/2 + s + nΔ``
    - ``F* = J - n/2 - s - n(δ₁ - 1/p)₊ + d_upper/p``
    """
    n, p, s = params.n, params.p, params.s
    if not 0 <= d_lower < n:
        raise ValueError(f"d_lower must lie in [0, {n}), got {d_lower}")
    if d_upper < 0:
        raise ValueError(f"d_upper must be nonnegative, got {d_upper}")
    delta1, delta2, omega = params.growth.growth_class
    J, case = j_index(params.family, p, params.q, delta1, delta2, n)
    Delta = max(0.0, delta2 - 1.0 / p + d_lower / (n * p))
    result = Thresholds(
        J=J,
        Delta=Delta,
        D_star=J + min(n * Delta, omega + d_lower / p) + d_upper / p,
        E_star=n / 2 + s + n * Delta,
        F_star=J - n / 2 - s - n * max(0.0, delta1 - 1.0 / p) + d_upper / p,
        case=case,
    )
    logger.info(
        f"Thresholds D*={result.D_star:.6g}, E*={result.E_star:.6g}, "
        f"F*={result.F_star:.6g} (d_lower={d_lower}, d_upper={d_upper})"
    )
    return result
