# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
import math
from math import comb
from typing import Any, Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import poch
from sklearn.utils import check_random_state, check_scalar

from ..lattice import DyadicCube
from ..molecules import (
    MoleculeGrid,
    MoleculeParams,
    MoleculeReport,
    SmoothFunctionHandle,
    molecule_check,
)
from ..utils import mixed_difference, multi_indices
from ..wavelets import BandlimitedPair

logger = logging.getLogger(__name__)

SymbolEvaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
SymbolDerivative = Callable[
    [np.ndarray, np.ndarray, Tuple[int, ...], Tuple[int, ...]], np.ndarray
]

FD_EXPONENT = 12
MESH_POINTS_PER_OCTAVE = 1 << 10
MESH_HALF_WIDTH = 1.5
MAX_PHASE_STEP = math.pi / 2
CHUNK = 256
SPREAD_LIMIT = 1.2


class SymbolHandle:
    """
    A symbol ``θ(x, ξ)`` on ``R^n × (R^n \\ {0})`` of order ``η``.

    Derivatives ``∂_ξ^β ∂_x^α θ`` come from ``derivative`` when given, from central
    differences otherwise (step ``2^{-12}`` in ``x`` and ``|ξ| 2^{-12}`` in ``ξ``).

    Parameters
    ----------
    evaluator : Callable[[np.ndarray, np.ndarray], np.ndarray]
        ``θ`` at broadcast points ``x`` and frequencies ``ξ``, both with last axis of
        length ``n``.
    order : float
        ``η >= 0``.
    n : int
        Dimension.
    derivative : Optional[Callable]
        ``(x, ξ, α, β) ↦ ∂_ξ^β ∂_x^α θ(x, ξ)``.
    label : str
        Description used in reports.
    """

    def __init__(
        self,
        evaluator: SymbolEvaluator,
        order: float,
        n: int = 1,
        derivative: Optional[SymbolDerivative] = None,
        label: str = "",
    ):
        check_scalar(order, "order", (int, float), min_val=0)
        check_scalar(n, "n", int, min_val=1)
        self.evaluator = evaluator
        self.order = float(order)
        self.n = n
        self._derivative = derivative
        self.label = label

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, float), np.asarray(xi, float)))

    def derivative(
        self,
        x: np.ndarray,
        xi: np.ndarray,
        alpha: Sequence[int],
        beta: Sequence[int],
    ) -> np.ndarray:
        alpha = tuple(int(a) for a in alpha)
        beta = tuple(int(b) for b in beta)
        if sum(alpha) + sum(beta) == 0:
            return self(x, xi)
        if self._derivative is not None:
            return np.asarray(self._derivative(x, xi, alpha, beta))
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        shape = x.shape[:-1]
        n = self.n
        z = np.concatenate([x.reshape(-1, n), xi.reshape(-1, n)], axis=1)
        magnitude = np.linalg.norm(z[:, n:], axis=1)
        steps = np.concatenate(
            [np.ones((len(z), n)), np.repeat(magnitude[:, None], n, axis=1)], axis=1
        ) * 2.0 ** -FD_EXPONENT
        values = mixed_difference(
            lambda w: self(w[:, :n], w[:, n:]), z, alpha + beta, steps
        )
        return values.reshape(shape)

    def __add__(self, other: "SymbolHandle") -> "SymbolHandle":
        if other.n != self.n:
            raise ValueError("Symbols live in different dimensions")

        def derivative(x, xi, alpha, beta):  # type: ignore
            return self.derivative(x, xi, alpha, beta) + other.derivative(
                x, xi, alpha, beta
            )

        return SymbolHandle(
            lambda x, xi: self(x, xi) + other(x, xi),
            max(self.order, other.order),
            self.n,
            derivative,
            f"{self.label} + {other.label}",
        )

    def __repr__(self) -> str:
        return f"SymbolHandle({self.label!r}, order={self.order}, n={self.n})"


def _power_derivative(r: np.ndarray, xi: np.ndarray, eta: float, b: int) -> np.ndarray:
    """``∂_ξ^b |ξ|^η`` in one dimension."""
    return poch(eta - b + 1, b) * r ** (eta - b) * np.sign(xi) ** b


def identity_symbol(n: int = 1) -> SymbolHandle:
    def derivative(x, xi, alpha, beta):  # type: ignore
        x, xi = np.broadcast_arrays(x, xi)
        return np.zeros(x.shape[:-1])

    return SymbolHandle(
        lambda x, xi: np.ones(np.broadcast_shapes(x.shape, xi.shape)[:-1]),
        0,
        n,
        derivative,
        "identity",
    )


def abs_power_symbol(eta: float = 1.0, n: int = 1) -> SymbolHandle:
    """``θ(x, ξ) = |ξ|^η``; closed-form derivatives when ``n = 1``."""

    def evaluate(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        x, xi = np.broadcast_arrays(x, xi)
        return np.linalg.norm(xi, axis=-1) ** eta

    derivative = None
    if n == 1:

        def derivative(x, xi, alpha, beta):  # type: ignore
            x, xi = np.broadcast_arrays(x, xi)
            if alpha[0] > 0:
                return np.zeros(x.shape[:-1])
            return _power_derivative(np.abs(xi[..., 0]), xi[..., 0], eta, beta[0])

    return SymbolHandle(evaluate, eta, n, derivative, f"|xi|^{eta}")


def sin_abs_symbol(eta: float = 1.0, n: int = 1) -> SymbolHandle:
    """``θ(x, ξ) = sin(x₁) |ξ|^η``; closed-form derivatives when ``n = 1``."""

    def evaluate(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        x, xi = np.broadcast_arrays(x, xi)
        return np.sin(x[..., 0]) * np.linalg.norm(xi, axis=-1) ** eta

    derivative = None
    if n == 1:

        def derivative(x, xi, alpha, beta):  # type: ignore
            x, xi = np.broadcast_arrays(x, xi)
            spatial = np.sin(x[..., 0] + alpha[0] * math.pi / 2)
            return spatial * _power_derivative(
                np.abs(xi[..., 0]), xi[..., 0], eta, beta[0]
            )

    return SymbolHandle(evaluate, eta, n, derivative, f"sin(x1)|xi|^{eta}")


SYMBOLS = {
    "identity": identity_symbol,
    "abs_power": abs_power_symbol,
    "sin_abs": sin_abs_symbol,
}


def symbol_from_config(config: Dict[str, Any], n: int = 1) -> SymbolHandle:
    """
    Builds a symbol from a JSON block ``{"kind": ..., "eta": ...}`` with kinds
    ``identity``, ``abs_power`` and ``sin_abs``.
    """
    if not isinstance(config, dict):
        raise TypeError(f"Symbol config must be a dict, got {type(config)}")
    kind = config.get("kind")
    if kind not in SYMBOLS:
        raise ValueError(f"Unknown symbol kind {kind!r}; expected one of {sorted(SYMBOLS)}")
    if kind == "identity":
        return identity_symbol(n)
    return SYMBOLS[kind](float(config.get("eta", 1.0)), n)


class ProbeSet(NamedTuple):
    """
    Seeded probes: points uniform in ``[-x_radius, x_radius]^n`` and frequencies or
    separations with log-uniform magnitude ``2^u``, ``u`` in ``octaves``, and uniform
    direction.
    """

    n: int = 1
    count: int = 1000
    seed: int = 0
    x_radius: float = 4.0
    octaves: Tuple[float, float] = (-6.0, 6.0)

    def _directions(self, rng: np.random.RandomState) -> np.ndarray:
        directions = rng.standard_normal((self.count, self.n))
        return directions / np.linalg.norm(directions, axis=1, keepdims=True)

    def _magnitudes(self, rng: np.random.RandomState) -> np.ndarray:
        low, high = self.octaves
        return np.exp2(rng.uniform(low, high, self.count))

    def symbol_probes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Pairs ``(x, ξ)`` of shape ``(count, n)`` each."""
        rng = check_random_state(self.seed)
        x = rng.uniform(-self.x_radius, self.x_radius, (self.count, self.n))
        xi = self._directions(rng) * self._magnitudes(rng)[:, None]
        return x, xi

    def kernel_probes(self) -> "KernelProbes":
        """
        Pairs ``(x, y)`` with shifts ``h`` and ``u, v`` such that
        ``|h| < |x - y|/2`` and ``|u| + |v| < |x - y|/2``.
        """
        rng = check_random_state(self.seed)
        x = rng.uniform(-self.x_radius, self.x_radius, (self.count, self.n))
        y = x + self._directions(rng) * self._magnitudes(rng)[:, None]
        distance = np.linalg.norm(x - y, axis=1)[:, None]
        h = 0.49 * rng.uniform(0, 1, (self.count, 1)) * distance * self._directions(rng)
        share = rng.uniform(0, 1, (self.count, 1))
        total = 0.49 * rng.uniform(0, 1, (self.count, 1)) * distance
        u = share * total * self._directions(rng)
        v = (1 - share) * total * self._directions(rng)
        return KernelProbes(x, y, h, u, v)


class KernelProbes(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    h: np.ndarray
    u: np.ndarray
    v: np.ndarray


def symbol_class_residual(
    sym: SymbolHandle,
    eta: float,
    alpha_max: int,
    beta_max: int,
    probes: ProbeSet = ProbeSet(),
) -> float:
    """
    Empirical ``sup |ξ|^{-η - |α| + |β|} |∂_ξ^β ∂_x^α θ(x, ξ)|`` over the probes and
    all ``|α| <= alpha_max``, ``|β| <= beta_max``.

    Parameters
    ----------
    sym : SymbolHandle
    eta : float
        The order to test against.
    alpha_max, beta_max : int
        Derivative caps in ``x`` and ``ξ``.
    probes : ProbeSet
        Probe points; the lower end of ``probes.octaves`` keeps ``ξ`` off zero.

    Returns
    -------
    float
    """
    if probes.n != sym.n:
        raise ValueError(f"Probes in R^{probes.n} for a symbol on R^{sym.n}")
    x, xi = probes.symbol_probes()
    magnitude = np.linalg.norm(xi, axis=1)
    residual = 0.0
    for alpha in multi_indices(sym.n, alpha_max):
        for beta in multi_indices(sym.n, beta_max):
            values = np.abs(sym.derivative(x, xi, alpha, beta))
            weighted = magnitude ** (-eta - sum(alpha) + sum(beta)) * values
            term = float(weighted.max())
            logger.debug(f"{sym.label}: alpha={alpha}, beta={beta}, sup={term:.6g}")
            residual = max(residual, term)
    logger.info(
        f"Symbol class residual of {sym.label} against order {eta} "
        f"(|alpha| <= {alpha_max}, |beta| <= {beta_max}): {residual:.6g}"
    )
    return residual


def _annulus_mesh(Q: DyadicCube) -> Tuple[np.ndarray, np.ndarray]:
    """Frequencies of both signs and trapezoid weights of ``dξ`` around scale ``j``."""
    count = int(2 * MESH_HALF_WIDTH * MESH_POINTS_PER_OCTAVE) + 1
    u = np.linspace(Q.j - MESH_HALF_WIDTH, Q.j + MESH_HALF_WIDTH, count)
    du = u[1] - u[0]
    radius = np.exp2(u)
    weights = np.full(count, du) * radius * math.log(2)
    weights[0] /= 2
    weights[-1] /= 2
    return np.concatenate([-radius, radius]), np.concatenate([weights, weights])


def psido_apply(
    sym: SymbolHandle,
    pair: BandlimitedPair,
    Q: DyadicCube,
    points: np.ndarray,
    order: int = 0,
) -> np.ndarray:
    """
    ``∂^order T_θ ψ_Q`` at ``points`` for ``n = 1``, where
    ``T_θ f(x) = (2π)^{-1} ∫ θ(x, ξ) f̂(ξ) e^{ixξ} dξ``.

    The integral runs over a log-uniform mesh with ``2^10`` points per octave on
    ``2^{j-1.5} <= |ξ| <= 2^{j+1.5}``, which contains the support of ``ψ̂_Q``.

    Parameters
    ----------
    sym : SymbolHandle
    pair : BandlimitedPair
    Q : DyadicCube
    points : np.ndarray
        Shape ``(N,)`` or ``(N, 1)``.
    order : int
        Derivative order in ``x``.

    Returns
    -------
    np.ndarray
        Complex values, shape ``(N,)``.

    Raises
    ------
    ValueError
        If the dimension is not one or the mesh cannot resolve the phase of
        ``e^{i(x - x_Q)ξ}`` at some point.
    """
    if sym.n != 1 or pair.n != 1 or Q.n != 1:
        raise ValueError("Pseudo-differential applications are computed for n = 1")
    x = np.asarray(points, dtype=float).reshape(-1)
    xi, weights = _annulus_mesh(Q)
    du = 1.0 / MESH_POINTS_PER_OCTAVE
    reach = float(np.abs(x - Q.corner[0]).max()) / Q.side if len(x) else 0.0
    if reach * 2.0 ** MESH_HALF_WIDTH * math.log(2) * du > MAX_PHASE_STEP:
        raise ValueError(
            f"Frequency mesh too coarse for points {reach:.3g} sides away from {Q}"
        )
    transform = pair.psi_hat_q(xi, Q) * weights / (2 * math.pi)
    out = np.zeros(len(x), dtype=complex)
    for start in range(0, len(x), CHUNK):
        block = x[start : start + CHUNK]
        xs = block[:, None, None]
        frequencies = xi[None, :, None]
        total = np.zeros((len(block), len(xi)), dtype=complex)
        for b in range(order + 1):
            symbol = sym.derivative(xs, frequencies, (b,), (0,))
            total += comb(order, b) * symbol * (1j * xi[None, :]) ** (order - b)
        out[start : start + CHUNK] = (
            total * np.exp(1j * np.multiply.outer(block, xi))
        ) @ transform
    return out


def psido_handle(
    sym: SymbolHandle, pair: BandlimitedPair, Q: DyadicCube
) -> SmoothFunctionHandle:
    """``|Q|^{η/n} T_θ ψ_Q`` with exact derivatives."""
    scale = Q.volume ** (sym.order / Q.n)

    def derivative(points: np.ndarray, gamma: Tuple[int, ...]) -> np.ndarray:
        return scale * psido_apply(sym, pair, Q, points, order=gamma[0])

    return SmoothFunctionHandle(
        lambda points: derivative(points, (0,)),
        n=1,
        derivative=derivative,
        radius=Q.side,
        label=f"T[{sym.label}] psi_{Q}",
    )


class PsidoReport(NamedTuple):
    """
    Molecule checks of ``|Q|^{η/n} T_θ ψ_Q`` with unit constant; ``constants`` are
    the fitted constants ``C_Q`` and ``spread = max C_Q / min C_Q``.
    """

    symbol: str
    params: MoleculeParams
    reports: Dict[DyadicCube, MoleculeReport]
    constants: Dict[DyadicCube, float]
    constant: float
    spread: float
    adjoint_residual: Optional[float]
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "symbol": self.symbol,
            "params": self.params._asdict(),
            "constant": self.constant,
            "spread": self.spread,
            "adjoint_residual": self.adjoint_residual,
            "adjoint_check": None
            if self.adjoint_residual is None
            else "compactly supported quadrature pairing",
            "passed": self.passed,
            "cubes": [
                {
                    "cube": Q.to_dict(),
                    "constant": self.constants[Q],
                    "report": self.reports[Q].to_dict(),
                }
                for Q in self.reports
            ],
        }


def adjoint_moment_residual(
    sym: SymbolHandle,
    pair: BandlimitedPair,
    Q: DyadicCube,
    degree: int,
    radius: float = 32.0,
    level: int = 6,
) -> float:
    """
    ``max_{γ <= degree} |∫ T_θ ψ_Q(x) ((x - x_Q)/ℓ(Q))^γ dx| / |Q|^{1/2}`` by Riemann
    sums over ``radius`` sides around ``Q``; a compactly supported stand-in for
    ``T*(x^γ) = 0``.
    """
    if degree < 0:
        return 0.0
    steps = 1 << level
    offsets = np.arange(-int(radius * steps), int((radius + 1) * steps) + 1) / steps
    points = Q.corner[0] + Q.side * offsets
    values = psido_apply(sym, pair, Q, points)
    cell = Q.side / steps
    residual = max(
        abs(np.sum(values * offsets ** gamma)) * cell / math.sqrt(Q.volume)
        for gamma in range(degree + 1)
    )
    logger.info(
        f"Adjoint moment residual of {sym.label} on {Q} up to degree {degree}: "
        f"{residual:.3e}"
    )
    return float(residual)


def psido_molecule_experiment(
    sym: SymbolHandle,
    pair: BandlimitedPair,
    cubes: Sequence[DyadicCube],
    M: float,
    N: float,
    grid: MoleculeGrid = MoleculeGrid(radius=6.0, level=6),
    F_star: Optional[float] = None,
) -> PsidoReport:
    """
    Checks ``|Q|^{η/n} T_θ(ψ_Q)`` against the ``(M, -1, M, N)``-molecule conditions
    for every cube and fits one constant per cube.

    The experiment passes when every fitted constant is finite and their spread is at
    most ``1.2``. When ``F_star`` is given and ``F* >= n/2``, the symbol must also
    annihilate monomials of degree up to ``⌊F* - n/2⌋``, measured by
    :func:`adjoint_moment_residual` against ``grid.moment_tol``; below ``n/2`` no
    moments are required.

    Parameters
    ----------
    sym : SymbolHandle
    pair : BandlimitedPair
    cubes : Sequence[DyadicCube]
        Cubes in ``R^1``, typically one per scale of a band.
    M, N : float
        Molecule decay and smoothness.
    grid : MoleculeGrid
    F_star : Optional[float]
        The threshold ``F*`` selecting the regime.

    Returns
    -------
    PsidoReport
    """
    if len(cubes) == 0:
        raise ValueError("At least one cube is needed")
    params = MoleculeParams(K=M, L=-1.0, M=M, N=N)
    reports: Dict[DyadicCube, MoleculeReport] = {}
    constants: Dict[DyadicCube, float] = {}
    for Q in cubes:
        report = molecule_check(psido_handle(sym, pair, Q), Q, params, grid)
        reports[Q] = report
        constants[Q] = report.constant()
    values = np.array(list(constants.values()))
    finite = bool(np.all(np.isfinite(values)) and np.all(values > 0))
    spread = float(values.max() / values.min()) if finite else math.inf
    adjoint = None
    moments_ok = True
    if F_star is not None and F_star >= 0.5:
        degree = int(math.floor(F_star - 0.5))
        adjoint = max(
            adjoint_moment_residual(sym, pair, Q, degree) for Q in cubes
        )
        moments_ok = adjoint <= grid.moment_tol
    passed = finite and spread <= SPREAD_LIMIT and moments_ok
    logger.info(
        f"Pseudo-differential molecule experiment for {sym.label}: constant "
        f"{values.max():.6g}, spread {spread:.4g}, passed={passed}"
    )
    return PsidoReport(
        symbol=sym.label,
        params=params,
        reports=reports,
        constants=constants,
        constant=float(values.max()),
        spread=spread,
        adjoint_residual=adjoint,
        passed=passed,
    )


def sampled_psido(
    sym: SymbolHandle, pair: BandlimitedPair, Q: DyadicCube, radius: float = 4.0, level: int = 6
) -> Tuple[np.ndarray, np.ndarray]:
    """``T_θ ψ_Q`` on the uniform grid of step ``ℓ(Q) 2^{-level}`` over ``radius`` sides."""
    steps = 1 << level
    offsets = np.arange(-int(radius * steps), int((radius + 1) * steps) + 1) / steps
    points = Q.corner[0] + Q.side * offsets
    return points, psido_apply(sym, pair, Q, points)
