# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from ..utils import hermitian_part, is_almost_hermitian
from .linalg import batch_mat_power, mat_power

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]
PowerEvaluator = Callable[[np.ndarray, float], np.ndarray]


class MatrixWeight:
    """
    A matrix weight ``W: R^n -> m×m`` Hermitian positive definite matrices.

    Parameters
    ----------
    evaluator : Callable[[np.ndarray], np.ndarray]
        Maps points of shape ``(N, n)`` to matrices of shape ``(N, m, m)``.
    n : int
        Ambient dimension.
    m : int
        Matrix size.
    label : str
        Short description used in reports.
    power_evaluator : Optional[Callable[[np.ndarray, float], np.ndarray]]
        Closed form for ``W(x)^α``; batched eigen-decomposition is used otherwise.
    constant : Optional[np.ndarray]
        Set for weights that do not depend on ``x``.
    """

    def __init__(
        self,
        evaluator: Evaluator,
        n: int,
        m: int,
        label: str,
        power_evaluator: Optional[PowerEvaluator] = None,
        constant: Optional[np.ndarray] = None,
    ):
        if n < 1 or m < 1:
            raise ValueError(f"Weight dimensions must be positive, got n={n}, m={m}")
        self.evaluator = evaluator
        self.n = n
        self.m = m
        self.label = label
        self.power_evaluator = power_evaluator
        self.constant = constant

    def _points(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, self.n)
        if points.shape[-1] != self.n:
            raise ValueError(
                f"Weight {self.label} lives in R^{self.n}, got points of shape "
                f"{points.shape}"
            )
        return points

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """``W(x)`` at ``points`` of shape ``(N, n)``, returned as ``(N, m, m)``."""
        points = self._points(points)
        values = np.asarray(self.evaluator(points))
        if values.shape != (len(points), self.m, self.m):
            raise ValueError(
                f"Weight {self.label} returned shape {values.shape}, expected "
                f"{(len(points), self.m, self.m)}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Weight {self.label} is singular at a quadrature node")
        return values

    def power(self, points: np.ndarray, alpha: float) -> np.ndarray:
        """``W(x)^α`` at ``points``, shape ``(N, m, m)``."""
        points = self._points(points)
        if self.power_evaluator is not None:
            values = np.asarray(self.power_evaluator(points, alpha))
            if not np.all(np.isfinite(values)):
                raise ValueError(
                    f"Weight {self.label} is singular at a quadrature node"
                )
            return values
        return batch_mat_power(self.evaluate(points), alpha)

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def scaled(self, c: float) -> "MatrixWeight":
        """The weight ``c·W`` for ``c > 0``."""
        if c <= 0:
            raise ValueError(f"Scale factor must be positive, got {c}")
        power = self.power_evaluator
        scaled_power: Optional[PowerEvaluator] = None
        if power is not None:
            scaled_power = lambda x, alpha: c ** alpha * power(x, alpha)  # noqa: E731
        return MatrixWeight(
            lambda x: c * self.evaluator(x),
            self.n,
            self.m,
            f"{c}*{self.label}",
            power_evaluator=scaled_power,
            constant=None if self.constant is None else c * self.constant,
        )

    def __repr__(self) -> str:
        return f"MatrixWeight({self.label}, n={self.n}, m={self.m})"


def _broadcast(matrix: np.ndarray, count: int) -> np.ndarray:
    return np.broadcast_to(matrix, (count,) + matrix.shape).copy()


def identity_weight(n: int = 1, m: int = 1) -> MatrixWeight:
    eye = np.eye(m)
    return MatrixWeight(
        lambda x: _broadcast(eye, len(x)),
        n,
        m,
        "identity",
        power_evaluator=lambda x, alpha: _broadcast(eye, len(x)),
        constant=eye,
    )


def constant_weight(A: np.ndarray, n: int = 1) -> MatrixWeight:
    """The weight ``W ≡ A`` for a fixed positive definite ``A``."""
    A = np.atleast_2d(np.asarray(A))
    if not is_almost_hermitian(A):
        raise ValueError("Constant weight matrix is not Hermitian")
    A = hermitian_part(A)
    mat_power(A, 1.0)  # raises unless positive definite
    powers: Dict[float, np.ndarray] = {}

    def power(x: np.ndarray, alpha: float) -> np.ndarray:
        if alpha not in powers:
            powers[alpha] = mat_power(A, alpha)
        return _broadcast(powers[alpha], len(x))

    return MatrixWeight(
        lambda x: _broadcast(A, len(x)),
        n,
        A.shape[0],
        "constant",
        power_evaluator=power,
        constant=A,
    )


def scalar_power_weight(
    a: float, n: int = 1, m: int = 1, coefficient: float = 1.0
) -> MatrixWeight:
    """The weight ``c·|x|^a·I_m``."""
    if coefficient <= 0:
        raise ValueError(f"coefficient must be positive, got {coefficient}")
    eye = np.eye(m)

    def scalar(x: np.ndarray) -> np.ndarray:
        return coefficient * np.linalg.norm(x, axis=1) ** a

    return MatrixWeight(
        lambda x: scalar(x)[:, None, None] * eye,
        n,
        m,
        f"scalar_power(a={a})",
        power_evaluator=lambda x, alpha: (scalar(x) ** alpha)[:, None, None] * eye,
    )


def diag_power_weight(
    exponents: Sequence[float],
    n: int = 1,
    coefficients: Optional[Sequence[float]] = None,
) -> MatrixWeight:
    """The weight ``diag(c_1|x|^{a_1}, ..., c_m|x|^{a_m})``."""
    exponents = np.asarray(exponents, dtype=float)
    m = len(exponents)
    coefficients = (
        np.ones(m) if coefficients is None else np.asarray(coefficients, dtype=float)
    )
    if coefficients.shape != exponents.shape or np.any(coefficients <= 0):
        raise ValueError("diag_power coefficients must be positive, one per exponent")

    def diagonal(x: np.ndarray) -> np.ndarray:
        radius = np.linalg.norm(x, axis=1)
        return coefficients[None, :] * radius[:, None] ** exponents[None, :]

    def as_matrices(entries: np.ndarray) -> np.ndarray:
        out = np.zeros(entries.shape + (m,))
        out[:, np.arange(m), np.arange(m)] = entries
        return out

    return MatrixWeight(
        lambda x: as_matrices(diagonal(x)),
        n,
        m,
        f"diag_power(a={exponents.tolist()})",
        power_evaluator=lambda x, alpha: as_matrices(diagonal(x) ** alpha),
    )


def grid_weight(
    source: Union[str, Path, np.ndarray], n: int, m: int
) -> MatrixWeight:
    """
    Piecewise-constant weight from samples: each row holds ``x_1..x_n`` followed by
    the ``m*m`` matrix entries in row-major order. A point takes the value of its
    nearest sample.
    """
    if isinstance(source, (str, Path)):
        with open(source) as csv_file:
            table = np.loadtxt(csv_file, delimiter=",", comments="#", ndmin=2)
    else:
        table = np.asarray(source, dtype=float)
    if table.ndim != 2 or table.shape[1] != n + m * m:
        raise ValueError(
            f"Grid weight table must have {n + m * m} columns, got shape {table.shape}"
        )
    matrices = hermitian_part(table[:, n:].reshape(-1, m, m))
    batch_mat_power(matrices, 1.0)  # raises unless positive definite
    tree = cKDTree(table[:, :n])

    def lookup(x: np.ndarray) -> np.ndarray:
        _, nearest = tree.query(x)
        return matrices[nearest]

    logger.info(f"Loaded grid weight with {len(table)} cells")
    return MatrixWeight(lookup, n, m, f"grid({len(table)} cells)")


def callable_weight(
    fn: Callable[[np.ndarray], np.ndarray], n: int, m: int, label: str = "callable"
) -> MatrixWeight:
    """Wraps a function returning ``(N, m, m)`` matrices for ``(N, n)`` points."""
    return MatrixWeight(fn, n, m, label)


def weight_from_config(config: Dict[str, Any], n: int, m: int = 1) -> MatrixWeight:
    """
    Builds a weight from its JSON description.

    Recognized kinds are ``identity``, ``constant`` (``matrix``), ``scalar_power``
    (``a``, optional ``coefficient``), ``diag_power`` (``exponents``, optional
    ``coefficients``) and ``grid`` (``path``).
    """
    kind = config.get("kind", "identity")
    if kind == "identity":
        return identity_weight(n, int(config.get("m", m)))
    if kind == "constant":
        return constant_weight(np.asarray(config["matrix"], dtype=float), n)
    if kind == "scalar_power":
        return scalar_power_weight(
            float(config["a"]),
            n,
            int(config.get("m", m)),
            float(config.get("coefficient", 1.0)),
        )
    if kind == "diag_power":
        return diag_power_weight(
            config["exponents"], n, config.get("coefficients")
        )
    if kind == "grid":
        return grid_weight(config["path"], n, int(config.get("m", m)))
    raise ValueError(f"Unknown weight kind {kind!r}")
