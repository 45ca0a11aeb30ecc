# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.utils import check_random_state

from ..lattice import DyadicCube, scaled_distance
from ..utils import hermitian_part, resolve_workers
from .ellipsoid import MinimumVolumeEllipsoid
from .linalg import mat_power
from .quadrature import QuadratureSpec
from .weights import MatrixWeight

logger = logging.getLogger(__name__)


class EllipsoidFitSpec(NamedTuple):
    """
    Settings of the general-``p`` reducing operator fit.

    ``n_directions`` random complex directions are scaled to the unit surface of
    ``ρ_Q`` and each is repeated at ``phases`` equally spaced phases, which makes the
    cloud symmetric and circular. ``n_holdout`` fresh directions measure the achieved
    equivalence ratio.
    """

    n_directions: int = 256
    phases: int = 4
    n_holdout: int = 720
    tol: float = 1e-3
    max_iter: int = 100000
    random_state: int = 0


class ReducingFit(NamedTuple):
    matrix: np.ndarray
    ratio: float


class ReducingFamily(NamedTuple):
    """
    Reducing operators ``A_Q`` of order ``p`` for a set of cubes, and the largest
    held-out equivalence ratio ``c₂/c₁`` among them.
    """

    p: float
    operators: Dict[DyadicCube, np.ndarray]
    ratio: float

    def get(self, Q: DyadicCube) -> np.ndarray:
        try:
            return self.operators[Q]
        except KeyError:
            raise ValueError(f"No reducing operator stored for {Q}")

    @property
    def m(self) -> int:
        return next(iter(self.operators.values())).shape[0]


def cube_norms(
    W: MatrixWeight,
    Q: DyadicCube,
    p: float,
    directions: np.ndarray,
    quad: QuadratureSpec = QuadratureSpec(),
) -> np.ndarray:
    """
    ``ρ_Q(z) = (⨍_Q |W^{1/p}(x) z|^p dx)^{1/p}`` for each row ``z`` of
    ``directions``.
    """
    points, weights = quad.cube_nodes(Q)
    roots = W.power(points, 1.0 / p)
    images = np.einsum("nij,kj->kni", roots, np.atleast_2d(directions))
    magnitudes = np.linalg.norm(images, axis=-1)
    return (magnitudes ** p @ weights) ** (1.0 / p)


def _random_directions(count: int, m: int, rng: np.random.RandomState) -> np.ndarray:
    samples = rng.standard_normal((count, m)) + 1j * rng.standard_normal((count, m))
    return samples / np.linalg.norm(samples, axis=1, keepdims=True)


def _complexify(shape: np.ndarray, m: int) -> np.ndarray:
    """
    Hermitian ``H`` with ``z* H z = v^T E v`` for the circular average ``E`` of a
    real ``2m×2m`` shape, where ``v = (Re z, Im z)``.
    """
    J = np.block([[np.zeros((m, m)), -np.eye(m)], [np.eye(m), np.zeros((m, m))]])
    circular = (shape + J.T @ shape @ J) / 2
    return hermitian_part(circular[:m, :m] + 1j * circular[m:, :m])


def reducing_operator_fit(
    W: MatrixWeight,
    Q: DyadicCube,
    p: float,
    fit: EllipsoidFitSpec = EllipsoidFitSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> ReducingFit:
    """
    Reducing operator of order ``p`` on ``Q`` with its held-out equivalence ratio.

    For ``p = 2`` this is ``(⨍_Q W)^{1/2}`` and the ratio is exactly one. Otherwise
    points of the unit surface of ``ρ_Q`` are enclosed by a minimum volume ellipsoid
    and ``A_Q`` is the square root of its circular Hermitian form.

    Raises
    ------
    ValueError
        If ``p <= 0`` or ``ρ_Q`` vanishes in some sampled direction.
    RuntimeError
        If the ellipsoid fit does not converge.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if p == 2:
        points, weights = quad.cube_nodes(Q)
        average = np.einsum("n,nij->ij", weights, W.evaluate(points))
        return ReducingFit(matrix=mat_power(average, 0.5), ratio=1.0)

    rng = check_random_state(fit.random_state)
    m = W.m
    directions = _random_directions(fit.n_directions, m, rng)
    norms = cube_norms(W, Q, p, directions, quad)
    if norms.min() <= 1e-12 * norms.max():
        raise ValueError(f"ρ_Q is degenerate on {Q} for weight {W.label}")
    surface = directions / norms[:, None]
    rotations = np.exp(2j * np.pi * np.arange(fit.phases) / fit.phases)
    cloud = (surface[None, :, :] * rotations[:, None, None]).reshape(-1, m)
    embedded = np.hstack([cloud.real, cloud.imag])
    ellipsoid = MinimumVolumeEllipsoid(
        centered=True, tol=fit.tol, max_iter=fit.max_iter
    ).fit(embedded)
    matrix = mat_power(_complexify(ellipsoid.shape_, m), 0.5)

    holdout = _random_directions(fit.n_holdout, m, rng)
    ratios = np.linalg.norm(holdout @ matrix.T, axis=1) / cube_norms(
        W, Q, p, holdout, quad
    )
    ratio = float(ratios.max() / ratios.min())
    logger.info(f"Reducing operator on {Q} (p={p}) has held-out ratio {ratio:.4f}")
    return ReducingFit(matrix=matrix, ratio=ratio)


def reducing_operator(
    W: MatrixWeight,
    Q: DyadicCube,
    p: float,
    fit: EllipsoidFitSpec = EllipsoidFitSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> np.ndarray:
    """
    A positive definite ``A_Q`` with ``|A_Q z| ~ (⨍_Q |W^{1/p}(x) z|^p dx)^{1/p}``.

    Parameters
    ----------
    W : MatrixWeight
        The weight.
    Q : DyadicCube
        The cube.
    p : float
        Order of the reducing operator.
    fit : EllipsoidFitSpec
        Settings of the ellipsoid fit used when ``p != 2``.
    quad : QuadratureSpec
        Quadrature on ``Q``.

    Returns
    -------
    np.ndarray
        The ``m×m`` matrix ``A_Q``.

    See Also
    --------
    reducing_operator_fit : also returns the achieved equivalence ratio.
    """
    return reducing_operator_fit(W, Q, p, fit, quad).matrix


def reducing_family(
    W: MatrixWeight,
    cubes: Iterable[DyadicCube],
    p: float,
    fit: EllipsoidFitSpec = EllipsoidFitSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
    workers: Optional[int] = None,
) -> ReducingFamily:
    """Reducing operators for every cube in ``cubes``, computed in parallel."""
    cubes = list(dict.fromkeys(cubes))
    fits = Parallel(n_jobs=resolve_workers(workers))(
        delayed(reducing_operator_fit)(W, Q, p, fit, quad) for Q in cubes
    )
    ratio = max((result.ratio for result in fits), default=1.0)
    return ReducingFamily(
        p=p,
        operators={Q: result.matrix for Q, result in zip(cubes, fits)},
        ratio=float(ratio),
    )


def reducing_growth_certificate(
    family: ReducingFamily,
    pairs: Sequence[Tuple[DyadicCube, DyadicCube]],
    beta1: float,
    beta2: float,
) -> float:
    """
    Smallest ``C`` with
    ``||A_Q A_R^{-1}||^p <= C max((ℓ(R)/ℓ(Q))^{β1}, (ℓ(Q)/ℓ(R))^{β2})
    (1 + |x_Q - x_R| / max(ℓ(Q), ℓ(R)))^{β1+β2}`` over ``pairs`` and the diagonal
    pairs of every cube they mention.

    Raises
    ------
    ValueError
        If some ``A_R`` is numerically singular or missing.
    """
    cubes: List[DyadicCube] = list(
        dict.fromkeys(Q for pair in pairs for Q in pair)
    )
    inverses: Dict[DyadicCube, np.ndarray] = {}
    for R in cubes:
        A_R = family.get(R)
        if np.linalg.cond(A_R) > 1e14:
            raise ValueError(f"Reducing operator on {R} is singular")
        inverses[R] = np.linalg.inv(A_R)
    all_pairs = list(pairs) + [(Q, Q) for Q in cubes]
    certificate = 0.0
    for Q, R in all_pairs:
        lhs = np.linalg.norm(family.get(Q) @ inverses[R], ord=2) ** family.p
        scale = max((R.side / Q.side) ** beta1, (Q.side / R.side) ** beta2)
        rhs = scale * scaled_distance(Q, R) ** (beta1 + beta2)
        certificate = max(certificate, lhs / rhs)
    return float(certificate)
