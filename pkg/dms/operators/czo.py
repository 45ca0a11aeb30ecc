# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math
from typing import Any, Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from sklearn.utils import check_scalar

from ..almostdiag import Thresholds
from ..lattice import DyadicCube
from ..molecules import (
    MoleculeGrid,
    MoleculeParams,
    MoleculeReport,
    SmoothFunctionHandle,
    bracket_fns,
    make_atom,
    molecule_check,
)
from ..utils import exact_order_indices, mixed_difference, multi_indices
from .psido import ProbeSet

logger = logging.getLogger(__name__)

KernelEvaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
KernelDerivative = Callable[
    [np.ndarray, np.ndarray, Tuple[int, ...], Tuple[int, ...]], np.ndarray
]

FD_EXPONENT = 12
ATOM_SMOOTHNESS = 2
DIAGONAL_TOLERANCE = 1e-9
SPREAD_LIMIT = 1.2
INTEGRAL_TOLERANCE = 1e-4
CHUNK = 256
REDUCED_STEPS = (1, 2, 3)


class KernelHandle:
    """
    A kernel ``K(x, y)`` on ``R^n × R^n`` off the diagonal.

    Mixed derivatives ``∂_x^α ∂_y^β K`` come from ``derivative`` when given, from
    central differences with step ``|x - y| 2^{-12}`` otherwise.

    Parameters
    ----------
    evaluator : Callable[[np.ndarray, np.ndarray], np.ndarray]
        ``K`` at broadcast points ``x`` and ``y`` with last axis of length ``n``.
    n : int
        Dimension.
    derivative : Optional[Callable]
        ``(x, y, α, β) ↦ ∂_x^α ∂_y^β K(x, y)``.
    odd : bool
        Whether ``K(x, x + z) = -K(x, x - z)``; atom images need odd kernels.
    label : str
        Description used in reports.
    """

    def __init__(
        self,
        evaluator: KernelEvaluator,
        n: int = 1,
        derivative: Optional[KernelDerivative] = None,
        odd: bool = False,
        label: str = "",
    ):
        check_scalar(n, "n", int, min_val=1)
        self.evaluator = evaluator
        self.n = n
        self._derivative = derivative
        self.odd = odd
        self.label = label

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, float), np.asarray(y, float)))

    def derivative(
        self,
        x: np.ndarray,
        y: np.ndarray,
        alpha: Sequence[int],
        beta: Sequence[int],
    ) -> np.ndarray:
        alpha = tuple(int(a) for a in alpha)
        beta = tuple(int(b) for b in beta)
        if sum(alpha) + sum(beta) == 0:
            return self(x, y)
        if self._derivative is not None:
            return np.asarray(self._derivative(x, y, alpha, beta))
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        shape = x.shape[:-1]
        n = self.n
        z = np.concatenate([x.reshape(-1, n), y.reshape(-1, n)], axis=1)
        step = np.linalg.norm(z[:, :n] - z[:, n:], axis=1)[:, None] * 2.0 ** -FD_EXPONENT
        values = mixed_difference(
            lambda w: self(w[:, :n], w[:, n:]), z, alpha + beta, step
        )
        return values.reshape(shape)

    def __repr__(self) -> str:
        return f"KernelHandle({self.label!r}, n={self.n}, odd={self.odd})"


def hilbert_kernel() -> KernelHandle:
    """
    ``K(x, y) = 1/(x - y)`` on ``R``, with
    ``∂_x^a ∂_y^b K = (-1)^a (a + b)! (x - y)^{-1-a-b}``.
    """

    def evaluate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x, y = np.broadcast_arrays(x, y)
        return 1.0 / (x[..., 0] - y[..., 0])

    def derivative(x, y, alpha, beta):  # type: ignore
        x, y = np.broadcast_arrays(x, y)
        a, b = alpha[0], beta[0]
        return (-1) ** a * math.factorial(a + b) * (x[..., 0] - y[..., 0]) ** (-1.0 - a - b)

    return KernelHandle(evaluate, 1, derivative, odd=True, label="hilbert")


def riesz_kernel(n: int = 2, epsilon: float = 0.01) -> KernelHandle:
    """
    ``K(x, y) = (x₁ - y₁) / (|x - y|² + ε²)^{(n+1)/2}``, the first Riesz kernel
    smoothly truncated at scale ``ε``; derivatives by differences.
    """
    check_scalar(epsilon, "epsilon", (int, float), min_val=0)

    def evaluate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x, y = np.broadcast_arrays(x, y)
        difference = x - y
        squared = np.sum(difference ** 2, axis=-1) + epsilon ** 2
        return difference[..., 0] / squared ** ((n + 1) / 2)

    return KernelHandle(evaluate, n, odd=True, label=f"riesz(n={n}, eps={epsilon})")


def kernel_from_config(config: Dict[str, Any]) -> KernelHandle:
    """
    Builds a kernel from a JSON block: ``{"kind": "hilbert"}`` or
    ``{"kind": "riesz", "n": 2, "epsilon": 0.01}``.
    """
    if not isinstance(config, dict):
        raise TypeError(f"Kernel config must be a dict, got {type(config)}")
    kind = config.get("kind")
    if kind == "hilbert":
        return hilbert_kernel()
    if kind == "riesz":
        return riesz_kernel(int(config.get("n", 2)), float(config.get("epsilon", 0.01)))
    raise ValueError(f"Unknown kernel kind {kind!r}; expected 'hilbert' or 'riesz'")


class CZKResiduals(NamedTuple):
    """
    Smallest empirical constants of the kernel conditions over the probes: ``"i"``
    size, ``"ii"`` smoothness in ``x``, ``"iii"`` smoothness in ``y`` and, for
    ``σ = 1``, ``"iv"`` the double difference. Conditions with no admissible
    multi-index are absent.
    """

    constants: Dict[str, float]
    probes: int

    @property
    def worst(self) -> float:
        return max(self.constants.values()) if self.constants else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"constants": dict(self.constants), "probes": self.probes}


def _magnitude(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=1)


def czk_condition_residuals(
    K: KernelHandle,
    E: float,
    F: float,
    sigma: int = 0,
    probes: Optional[ProbeSet] = None,
) -> CZKResiduals:
    """
    Empirical constants of the Calderón-Zygmund kernel conditions of order
    ``(E; F)``:

    - ``|∂_x^α K(x, y)| |x - y|^{n+|α|}`` for ``|α| <= ⌊⌊E⌋⌋₊``
    - ``|∂_x^α K(x, y) - ∂_x^α K(x + h, y)| |x - y|^{n+E} / |h|^{E**}`` for
      ``|α| = ⌊⌊E⌋⌋``
    - ``|∂_x^α ∂_y^β K(x, y) - ∂_x^α ∂_y^β K(x, y + h)| |x - y|^{n+F} / |h|^{(F-|α|)**}``
      for ``|α| <= ⌊⌊E⌋⌋₊`` and ``|β| = ⌊⌊F - |α|⌋⌋``
    - for ``σ = 1``, the double difference of ``∂_x^α ∂_y^β K`` in ``x + u`` and
      ``y + v`` times ``|x - y|^{n+F} / (|u|^{E**} |v|^{(F-E)**})`` for
      ``|α| = ⌊⌊E⌋⌋`` and ``|β| = ⌊⌊F - E⌋⌋``

    with ``|h| < |x - y|/2`` and ``|u| + |v| < |x - y|/2``.

    Parameters
    ----------
    K : KernelHandle
    E, F : float
        Orders of the kernel class.
    sigma : int
        ``0`` or ``1``.
    probes : Optional[ProbeSet]
        Defaults to 1000 seeded probes in the dimension of ``K``.

    Returns
    -------
    CZKResiduals

    Raises
    ------
    ValueError
        If ``sigma`` is not 0 or 1, or a probe pair lies on the diagonal.
    """
    if sigma not in (0, 1):
        raise ValueError(f"sigma must be 0 or 1, got {sigma}")
    probes = ProbeSet(n=K.n) if probes is None else probes
    if probes.n != K.n:
        raise ValueError(f"Probes in R^{probes.n} for a kernel on R^{K.n}")
    x, y, h, u, v = probes.kernel_probes()
    distance = _magnitude(x - y)
    if np.any(distance <= DIAGONAL_TOLERANCE):
        raise ValueError("A probe pair lies on the diagonal x = y")
    n = K.n
    E_brackets = bracket_fns(E)
    constants: Dict[str, float] = {}

    size = 0.0
    for alpha in multi_indices(n, max(E_brackets.strict_floor, 0)):
        values = np.abs(K.derivative(x, y, alpha, (0,) * n))
        size = max(size, float((values * distance ** (n + sum(alpha))).max()))
    constants["i"] = size

    if E_brackets.strict_floor >= 0:
        smooth_x = 0.0
        for alpha in exact_order_indices(n, E_brackets.strict_floor):
            zero = (0,) * n
            difference = np.abs(
                K.derivative(x, y, alpha, zero) - K.derivative(x + h, y, alpha, zero)
            )
            ratio = difference * distance ** (n + E) / _magnitude(h) ** E_brackets.star
            smooth_x = max(smooth_x, float(ratio.max()))
        constants["ii"] = smooth_x

    smooth_y = None
    for alpha in multi_indices(n, max(E_brackets.strict_floor, 0)):
        rest = bracket_fns(F - sum(alpha))
        if rest.strict_floor < 0:
            continue
        for beta in exact_order_indices(n, rest.strict_floor):
            difference = np.abs(
                K.derivative(x, y, alpha, beta) - K.derivative(x, y + h, alpha, beta)
            )
            ratio = difference * distance ** (n + F) / _magnitude(h) ** rest.star
            smooth_y = max(smooth_y or 0.0, float(ratio.max()))
    if smooth_y is not None:
        constants["iii"] = smooth_y

    rest = bracket_fns(F - E)
    if sigma == 1 and E_brackets.strict_floor >= 0 and rest.strict_floor >= 0:
        double = 0.0
        for alpha in exact_order_indices(n, E_brackets.strict_floor):
            for beta in exact_order_indices(n, rest.strict_floor):
                difference = np.abs(
                    K.derivative(x, y, alpha, beta)
                    - K.derivative(x + u, y, alpha, beta)
                    - K.derivative(x, y + v, alpha, beta)
                    + K.derivative(x + u, y + v, alpha, beta)
                )
                bound = _magnitude(u) ** E_brackets.star * _magnitude(v) ** rest.star
                ratio = difference * distance ** (n + F) / bound
                double = max(double, float(ratio.max()))
        constants["iv"] = double

    logger.info(
        f"Kernel residuals of {K.label} for E={E}, F={F}, sigma={sigma} over "
        f"{probes.count} probes: "
        + ", ".join(f"{name}={value:.4g}" for name, value in constants.items())
    )
    return CZKResiduals(constants, probes.count)


class CZOParameters(NamedTuple):
    """
    Lower bounds for a Calderón-Zygmund operator to map the space boundedly
    (``σ >= sigma``, ``E > E_lower``, ``F > F_lower``, ``G >= G``, ``H >= H``), the
    orders ``E`` and ``F`` actually used and the ``(K, L, M, N)`` of the molecules
    ``C T(t_P)``.
    """

    sigma: int
    E_lower: float
    F_lower: float
    G: int
    H: int
    E: float
    F: float
    molecule: MoleculeParams

    def diagnostics(self) -> Sequence[str]:
        messages = []
        if not self.E > self.E_lower:
            messages.append(f"E = {self.E} is not above {self.E_lower}")
        if not self.F > self.F_lower:
            messages.append(f"F = {self.F} is not above {self.F_lower}")
        return messages

    def to_dict(self) -> Dict[str, Any]:
        out = self._asdict()
        out["molecule"] = self.molecule._asdict()
        return out


def czo_parameters(
    thresholds: Thresholds,
    n: int = 1,
    E: Optional[float] = None,
    F: Optional[float] = None,
) -> CZOParameters:
    """
    The admissibility recipe for Calderón-Zygmund operators on a space with the given
    almost diagonal thresholds:
    ``σ >= 1`` when ``E* >= n/2``, ``E > (E* - n/2)₊``,
    ``F > max(D*, F* + n/2) - n``, ``G >= ⌊E* - n/2⌋₊`` and ``H >= ⌊F* - n/2⌋``.

    ``E`` and ``F`` default to the lower bounds plus ``1/2`` and ``1``. The molecule
    orders are ``L = F* - n/2``, ``K = M = F + n`` and ``N`` the midpoint of
    ``(⌊E* - n/2⌋, min(⌈⌈E* - n/2⌉⌉, E))``, or ``N = 0`` when ``E* < n/2``.

    Examples
    --------
    >>> from dms.almostdiag import Thresholds
    >>> czo_parameters(Thresholds(1.0, 0.0, 1.0, 0.5, 0.5, "subcritical")).molecule
    MoleculeParams(K=2.0, L=0.0, M=2.0, N=0.25)
    """
    half = n / 2
    e = thresholds.E_star - half
    f = thresholds.F_star - half
    sigma = 1 if e >= 0 else 0
    E_lower = max(e, 0.0)
    F_lower = max(thresholds.D_star, thresholds.F_star + half) - n
    E = E_lower + 0.5 if E is None else float(E)
    F = F_lower + 1.0 if F is None else float(F)
    if e >= 0:
        low = math.floor(e)
        high = min(bracket_fns(e).strict_ceil, E)
        N = (low + high) / 2
    else:
        N = 0.0
    molecule = MoleculeParams(K=F + n, L=f, M=F + n, N=N)
    parameters = CZOParameters(
        sigma=sigma,
        E_lower=E_lower,
        F_lower=F_lower,
        G=max(math.floor(e), 0),
        H=math.floor(f),
        E=E,
        F=F,
        molecule=molecule,
    )
    logger.info(f"Calderon-Zygmund parameters: {parameters}")
    return parameters


def _odd_order(order: int) -> int:
    order = max(order, -1)
    return order + 1 if order % 2 == 0 else order


def atom_moment_order(F: float) -> int:
    """
    Moments ``⌈F⌉ - 1`` give images decaying like ``|x|^{-(1+F)}``; the order is
    rounded up to an odd one so the atoms are even about their centres.
    """
    return _odd_order(math.ceil(F) - 1)


def atom_image_handle(
    K: KernelHandle, atom: SmoothFunctionHandle, P: DyadicCube, level: int = 8
) -> SmoothFunctionHandle:
    """
    ``T t_P(x) = ∫ K(x, y) t_P(y) dy`` for an atom ``t_P`` supported in ``3P`` and an
    odd kernel in one dimension.

    The quadrature nodes are the midpoints ``x_P + ℓ(P)(m + 1/2) 2^{-level}`` over
    ``3P``. Nodes within one cell of ``x`` contribute ``K(x, y)(t_P(y) - t_P(x))``,
    which is the principal value for odd kernels at points of the grid
    ``x_P + ℓ(P) 2^{-level} Z``.

    Raises
    ------
    ValueError
        If the kernel is not odd or one-dimensional, or an evaluation point hits a
        quadrature node.
    """
    if K.n != 1 or P.n != 1:
        raise ValueError("Atom images are computed for n = 1")
    if not K.odd:
        raise ValueError(f"Atom images need an odd kernel, {K.label} is not")
    steps = 1 << level
    cell = P.side / steps
    nodes = P.corner[0] + P.side * (np.arange(-steps, 2 * steps) + 0.5) / steps
    node_values = np.asarray(atom(nodes[:, None]))

    def evaluate(points: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(points)[:, 0]
        out = np.zeros(len(x), dtype=np.result_type(node_values, float))
        for start in range(0, len(x), CHUNK):
            block = x[start : start + CHUNK]
            difference = np.abs(block[:, None] - nodes[None, :])
            if np.any(difference < DIAGONAL_TOLERANCE * cell):
                raise ValueError(
                    f"Quadrature near-diagonal instability: an evaluation point of "
                    f"{K.label} hits a node of level {level}"
                )
            kernel = K(block[:, None, None], nodes[None, :, None])
            centre = np.asarray(atom(block[:, None]))
            near = difference <= cell
            integrand = kernel * (node_values[None, :] - near * centre[:, None])
            out[start : start + CHUNK] = integrand.sum(axis=1) * cell
        return out

    return SmoothFunctionHandle(
        evaluate, n=1, radius=P.side, label=f"T[{K.label}] atom on {P}"
    )


def _decay_exponent(
    image: SmoothFunctionHandle, P: DyadicCube, decay_range: Tuple[float, float]
) -> float:
    """Least squares slope of ``-log|T t_P|`` against ``log(1 + |x - c_P|/ℓ)``."""
    low, high = decay_range
    distances = np.exp2(np.linspace(math.log2(low), math.log2(high), 16))
    # integer multiples of the side keep the points on the quadrature midpoint grid
    distances = np.unique(np.round(distances))
    points = np.concatenate([P.center[0] + P.side * distances, P.center[0] - P.side * distances])
    values = np.abs(image(points[:, None]))
    if np.any(values <= 0):
        return math.inf
    logs = np.log1p(np.concatenate([distances, distances]))
    slope = np.polyfit(logs, np.log(values), 1)[0]
    return float(-slope)


def _image_integral(image: SmoothFunctionHandle, P: DyadicCube, radius: float) -> float:
    """``|∫ T t_P| / ∫ |T t_P|`` over ``radius`` sides on each side of ``c_P``."""
    steps = 16
    offsets = np.arange(-int(radius * steps), int(radius * steps) + 1) / steps
    values = np.asarray(image((P.center[0] + P.side * offsets)[:, None]))
    total = float(np.abs(values).sum())
    return abs(float(values.sum())) / total if total > 0 else 0.0


class AtomImage(NamedTuple):
    cube: DyadicCube
    report: MoleculeReport
    constant: float
    centre_value: float
    decay_exponent: float
    integral_residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cube": self.cube.to_dict(),
            "constant": self.constant,
            "centre_value": self.centre_value,
            "decay_exponent": self.decay_exponent,
            "integral_residual": self.integral_residual,
            "report": self.report.to_dict(),
        }


class CZOReport(NamedTuple):
    """
    Molecule checks of ``T(t_P)`` for atoms ``t_P`` on one cube per scale, the fitted
    constants and their spread, and the far-field decay of images of atoms with
    fewer moments.

    ``reduced_monotone`` holds when the slowest full decay followed by
    ``reduced_decay_exponents`` never increases.
    """

    kernel: str
    parameters: CZOParameters
    atom_moments: int
    images: Sequence[AtomImage]
    constant: float
    spread: float
    reduced_moments: Sequence[int]
    reduced_decay_exponents: Sequence[float]
    reduced_monotone: bool
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel": self.kernel,
            "parameters": self.parameters.to_dict(),
            "atom_moments": self.atom_moments,
            "constant": self.constant,
            "spread": self.spread,
            "reduced_moments": list(self.reduced_moments),
            "reduced_decay_exponents": list(self.reduced_decay_exponents),
            "reduced_monotone": self.reduced_monotone,
            "passed": self.passed,
            "images": [image.to_dict() for image in self.images],
        }


def czo_atom_image_experiment(
    K: KernelHandle,
    thresholds: Thresholds,
    scales: Sequence[int],
    E: Optional[float] = None,
    F: Optional[float] = None,
    grid: MoleculeGrid = MoleculeGrid(radius=6.0, level=6),
    level: int = 8,
    decay_range: Tuple[float, float] = (4.0, 32.0),
) -> CZOReport:
    """
    Checks that images of atoms under the operator with kernel ``K`` are multiples of
    ``(K, L, M, N)``-molecules with one constant across scales.

    For each scale ``j`` the atom lives on ``Q_{j,0}``, has
    :func:`atom_moment_order` moments and is smooth to order 2. Each image is checked
    against :func:`czo_parameters`' molecule orders; the experiment passes when the
    fitted constants are finite with spread at most ``1.2``, every far-field decay
    exponent reaches ``n + F`` up to 5% and ``|∫ T t_P| / ∫|T t_P|`` stays below
    ``1e-4``. The decay fit is then repeated on the coarsest cube with atoms having
    one, two and three fewer moments (never fewer than none), which is never part of
    ``passed``.

    Parameters
    ----------
    K : KernelHandle
        An odd kernel on ``R``.
    thresholds : Thresholds
        Almost diagonal thresholds of the space.
    scales : Sequence[int]
        The scale band.
    E, F : Optional[float]
        Kernel orders, defaulting as in :func:`czo_parameters`.
    grid : MoleculeGrid
        Molecule sampling; its level must not exceed ``level``.
    level : int
        Quadrature refinement per side of ``P``.
    decay_range : Tuple[float, float]
        Distances, in sides, of the far-field fit.

    Returns
    -------
    CZOReport
    """
    if len(scales) == 0:
        raise ValueError("At least one scale is needed")
    if grid.level > level:
        raise ValueError(
            f"Molecule grid level {grid.level} is finer than the quadrature level {level}"
        )
    parameters = czo_parameters(thresholds, K.n, E, F)
    moments = atom_moment_order(parameters.F)
    images = []
    for j in scales:
        P = DyadicCube(int(j), (0,))
        atom = make_atom(P, moments, ATOM_SMOOTHNESS)
        image = atom_image_handle(K, atom, P, level)
        report = molecule_check(image, P, parameters.molecule, grid)
        images.append(
            AtomImage(
                cube=P,
                report=report,
                constant=report.constant(),
                centre_value=float(np.abs(image(P.center[None, :]))[0]),
                decay_exponent=_decay_exponent(image, P, decay_range),
                integral_residual=_image_integral(image, P, decay_range[1]),
            )
        )

    coarsest = DyadicCube(int(min(scales)), (0,))
    reduced_moments = [max(moments - step, -1) for step in REDUCED_STEPS]
    by_order: Dict[int, float] = {}
    for order in reduced_moments:
        if order not in by_order:
            atom = make_atom(coarsest, order, ATOM_SMOOTHNESS)
            by_order[order] = _decay_exponent(
                atom_image_handle(K, atom, coarsest, level), coarsest, decay_range
            )
    reduced = [by_order[order] for order in reduced_moments]
    slowest = min(image.decay_exponent for image in images)
    monotone = bool(np.all(np.diff([slowest] + reduced) <= 0))

    constants = np.array([image.constant for image in images])
    finite = bool(np.all(np.isfinite(constants)) and np.all(constants > 0))
    spread = float(constants.max() / constants.min()) if finite else math.inf
    decays = all(
        image.decay_exponent >= 0.95 * (K.n + parameters.F) for image in images
    )
    integrals = all(image.integral_residual <= INTEGRAL_TOLERANCE for image in images)
    passed = finite and spread <= SPREAD_LIMIT and decays and integrals
    logger.info(
        f"Atom image experiment for {K.label}: constant {constants.max():.6g}, "
        f"spread {spread:.4g}, reduced moment decays "
        f"{', '.join(f'{value:.3g}' for value in reduced)}, passed={passed}"
    )
    if not monotone:
        logger.warning(
            f"Far-field decay of {K.label} atom images does not fall with the moments: "
            f"{slowest:.3g} then {reduced}"
        )
    return CZOReport(
        kernel=K.label,
        parameters=parameters,
        atom_moments=moments,
        images=images,
        constant=float(constants.max()),
        spread=spread,
        reduced_moments=reduced_moments,
        reduced_decay_exponents=reduced,
        reduced_monotone=monotone,
        passed=passed,
    )
