# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import itertools
import logging
from typing import Callable, Dict, NamedTuple, Sequence

import numpy as np

from ..almostdiag import OperatorMatrix
from ..lattice import DyadicCube, scaled_distance
from ..utils import cartesian_product
from .handles import SmoothFunctionHandle

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]
HandleFactory = Callable[[DyadicCube], SmoothFunctionHandle]

DILATION = 1.5


def decomposition_weight(R: DyadicCube, P: DyadicCube, M: float) -> float:
    """``(1 + |x_R - x_P| / ℓ(R))^{-M}`` for cubes of the same side."""
    if R.j != P.j:
        raise ValueError(f"Cubes {R} and {P} have different sides")
    return scaled_distance(R, P) ** (-M)


def _bump_around(points: np.ndarray, centers: np.ndarray, side: float) -> np.ndarray:
    u = (points - centers) / (DILATION * side)
    inside = np.all(np.abs(u) < 1, axis=1)
    out = np.zeros(len(points))
    out[inside] = np.exp(np.sum(1 - 1 / (1 - u[inside] ** 2), axis=1))
    return out


def _bump(points: np.ndarray, P: DyadicCube) -> np.ndarray:
    return _bump_around(points, P.center[None, :], P.side)


def _partition_denominator(points: np.ndarray, j: int) -> np.ndarray:
    cells = np.floor(np.ldexp(points, j)).astype(int)
    total = np.zeros(len(points))
    for offset in itertools.product((-1, 0, 1), repeat=points.shape[1]):
        neighbours = cells + np.asarray(offset)[None, :]
        total += _bump_around(points, np.ldexp(neighbours + 0.5, -j), 2.0 ** -j)
    return total


class AtomDecomposition(NamedTuple):
    """
    ``ψ_R ≈ C Σ_P w_P t_P`` over the cubes ``P`` of side ``ℓ(R)`` in the window,
    with ``t_P`` proportional to ``ψ_R χ_P`` for a smooth partition of unity
    ``{χ_P}`` subordinate to ``{3P}``, normalized so ``sup |t_P| <= |P|^{-1/2}``.
    """

    weights: Dict[DyadicCube, float]
    atoms: Dict[DyadicCube, SmoothFunctionHandle]
    constant: float
    residual: float


def psi_atom_decomposition(
    psi_R: Evaluator,
    R: DyadicCube,
    M: float,
    radius: int = 4,
    extent: int = 8,
    level: int = 8,
) -> AtomDecomposition:
    """
    Splits ``ψ_R`` into pieces ``w_P t_P`` with ``w_P = (1 + |x_R - x_P|/ℓ(R))^{-M}``.

    The constant ``C`` is the least squares fit of ``Σ_P w_P t_P`` to ``ψ_R`` on a
    uniform grid of step ``ℓ(R) 2^{-level}`` covering ``extent`` sides around
    ``R``, and ``residual`` is the sup-norm misfit there. The cubes ``P`` are those
    at most ``radius`` positions away from ``R`` along every axis. At truncation this
    is a sanity check rather than an identity; the residual shrinks as ``radius``
    grows and vanishes once the window covers the support of ``ψ_R``.

    Parameters
    ----------
    psi_R : Callable[[np.ndarray], np.ndarray]
        ``ψ_R`` at points of shape ``(N, n)``.
    R : DyadicCube
        The cube of ``ψ_R``.
    M : float
        Decay exponent of the weights.
    radius : int
        Half-width of the window of cubes ``P``, in positions.
    extent : int
        Half-width of the sampling region, in sides of ``R``.
    level : int
        Grid refinement.

    Returns
    -------
    AtomDecomposition
    """
    if radius < 0 or extent < 1:
        raise ValueError(f"radius must be >= 0 and extent >= 1, got {radius}, {extent}")
    steps = 1 << level
    unit = np.arange(-extent * steps, (extent + 1) * steps + 1) / steps
    points = R.corner[None, :] + R.side * cartesian_product(*([unit] * R.n))
    values = np.asarray(psi_R(points))
    denominator = _partition_denominator(points, R.j)

    cubes = [
        DyadicCube(R.j, tuple(k + d for k, d in zip(R.k, shift)))
        for shift in itertools.product(range(-radius, radius + 1), repeat=R.n)
    ]
    weights = {P: decomposition_weight(R, P, M) for P in cubes}
    pieces = {P: values * _bump(points, P) / denominator for P in cubes}
    normalization = max(
        float(np.abs(pieces[P]).max()) * np.sqrt(P.volume) / weights[P] for P in cubes
    )
    if normalization == 0:
        normalization = 1.0
    combined = sum(pieces.values()) / normalization

    fit_norm = float(np.vdot(combined, combined).real)
    constant = (
        float(np.vdot(combined, values).real) / fit_norm if fit_norm > 0 else 0.0
    )
    residual = float(np.abs(values - constant * combined).max())

    def make_piece(P: DyadicCube) -> SmoothFunctionHandle:
        def piece(x: np.ndarray) -> np.ndarray:
            x = np.atleast_2d(x)
            return (
                np.asarray(psi_R(x))
                * _bump(x, P)
                / np.maximum(_partition_denominator(x, R.j), np.finfo(float).tiny)
                / (normalization * weights[P])
            )

        return SmoothFunctionHandle(piece, n=R.n, radius=P.side, label=f"t_{P}")

    logger.info(
        f"Atom decomposition of psi on {R} over {len(cubes)} cubes: C={constant:.6g}, "
        f"residual={residual:.3e}"
    )
    return AtomDecomposition(
        weights=weights,
        atoms={P: make_piece(P) for P in cubes},
        constant=constant,
        residual=residual,
    )


def molecule_gram_matrix(
    analysis: HandleFactory,
    synthesis: HandleFactory,
    rows: Sequence[DyadicCube],
    cols: Sequence[DyadicCube],
    lower: float,
    upper: float,
    level: int = 10,
    drop_below: float = 0.0,
) -> OperatorMatrix:
    """
    ``u_{QR} = ∫ g_R(x) conj(m_Q(x)) dx`` for analysis molecules ``m_Q`` (rows) and
    synthesis molecules ``g_R`` (columns), by Riemann sums on the grid of step
    ``2^{-level}`` over ``[lower, upper]^n``.

    The entries approximate the pairing of sampled functions; coefficient sequences
    pair exactly through :func:`dms.almostdiag.apply`.
    """
    if len(rows) == 0 or len(cols) == 0:
        return OperatorMatrix({}, rows[0].n if rows else 1)
    n = rows[0].n
    axis = np.arange(lower * (1 << level), upper * (1 << level) + 1) / (1 << level)
    points = cartesian_product(*([axis] * n))
    cell = 2.0 ** (-level * n)
    row_values = np.array([np.asarray(analysis(Q)(points)) for Q in rows])
    col_values = np.array([np.asarray(synthesis(R)(points)) for R in cols])
    gram = np.conj(row_values) @ col_values.T * cell
    entries = {
        (Q, R): complex(gram[a, b])
        for a, Q in enumerate(rows)
        for b, R in enumerate(cols)
        if abs(gram[a, b]) > drop_below
    }
    logger.info(
        f"Molecule Gram matrix {len(rows)}x{len(cols)} with {len(entries)} entries"
    )
    return OperatorMatrix(entries, n)
