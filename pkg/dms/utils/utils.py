# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import itertools
import logging
import os
from math import comb
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

THREADS_ENVIRONMENT_VARIABLE = "DMS_THREADS"


def is_almost_hermitian(X: np.ndarray, rtol: float = 1e-12) -> bool:
    """
    Checks ``X`` against its conjugate transpose, relative to the largest entry.
    Works on a single matrix or on a stack of shape ``(..., m, m)``.
    """
    X = np.asarray(X)
    scale = max(float(np.abs(X).max()), np.finfo(float).tiny)
    return bool(np.abs(X - np.conj(np.swapaxes(X, -1, -2))).max() <= rtol * scale)


def hermitian_part(X: np.ndarray) -> np.ndarray:
    return (X + np.conj(np.swapaxes(X, -1, -2))) / 2


def cartesian_product(*arrays: np.ndarray) -> np.ndarray:
    """
    Compute the cartesian product of multiple arrays
    """
    N = len(arrays)
    return np.transpose(
        np.meshgrid(*arrays, indexing="ij"), np.roll(np.arange(N + 1), -1)
    ).reshape(-1, N)


def multi_indices(n: int, max_order: int) -> List[Tuple[int, ...]]:
    """
    All multi-indices ``γ`` in ``n`` variables with ``|γ| <= max_order``, ordered by
    total degree and then lexicographically. Empty when ``max_order < 0``.
    """
    if max_order < 0:
        return []
    indices = [
        gamma
        for gamma in itertools.product(range(max_order + 1), repeat=n)
        if sum(gamma) <= max_order
    ]
    return sorted(indices, key=lambda gamma: (sum(gamma), gamma))


def exact_order_indices(n: int, order: int) -> Iterator[Tuple[int, ...]]:
    return (gamma for gamma in multi_indices(n, order) if sum(gamma) == order)


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Resolves the joblib ``n_jobs`` value for a parallel section.

    Parameters
    ----------
    workers : Optional[int]
        Requested number of workers. ``None`` means one worker, ``-1`` means all
        available cores, following joblib conventions.

    Returns
    -------
    int
        The requested value, capped by the ``DMS_THREADS`` environment variable when
        it is set.
    """
    requested = 1 if workers is None else int(workers)
    if requested == 0:
        raise ValueError("workers must be nonzero")
    cap_value = os.environ.get(THREADS_ENVIRONMENT_VARIABLE)
    if cap_value is None or cap_value.strip() == "":
        return requested
    try:
        cap = int(cap_value)
    except ValueError:
        logger.warning(
            f"Ignoring {THREADS_ENVIRONMENT_VARIABLE}={cap_value!r}; not an integer"
        )
        return requested
    if cap < 1:
        return requested
    if requested < 0:
        return cap
    return min(requested, cap)


def mixed_difference(
    fn: Callable[[np.ndarray], np.ndarray],
    points: np.ndarray,
    orders: Sequence[int],
    step: Union[float, np.ndarray],
) -> np.ndarray:
    """
    ``∂^orders fn`` at ``points`` of shape ``(N, d)`` by tensor central differences
    with one Richardson extrapolation.

    ``step`` broadcasts against ``(N, d)``, so each point and coordinate may use its
    own step.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    orders = tuple(int(o) for o in orders)
    if sum(orders) == 0:
        return np.asarray(fn(points))
    steps = np.broadcast_to(np.asarray(step, dtype=float), points.shape)
    stencils = [
        [((-1) ** r * comb(order, r), order / 2 - r) for r in range(order + 1)]
        for order in orders
    ]

    def central(h: np.ndarray) -> np.ndarray:
        total: np.ndarray = np.zeros(len(points))
        for terms in itertools.product(*stencils):
            coefficient = float(np.prod([c for c, _ in terms]))
            shift = np.array([s for _, s in terms])
            total = total + coefficient * np.asarray(fn(points + shift[None, :] * h))
        scale = np.prod(h ** np.asarray(orders)[None, :], axis=1)
        return total / scale

    return (4 * central(steps / 2) - central(steps)) / 3
