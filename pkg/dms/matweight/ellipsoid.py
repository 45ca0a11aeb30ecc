# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from typing import Any, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array

logger = logging.getLogger(__name__)


class MinimumVolumeEllipsoid(BaseEstimator):
    """
    Minimum volume enclosing ellipsoid of a point cloud by Khachiyan's iteration.

    The fitted ellipsoid is ``{x : (x - c)^T A (x - c) <= 1}`` with ``A = shape_``
    and ``c = center_``. After the iteration stops the shape is rescaled so that
    every input point lies inside.

    Parameters
    ----------
    centered : bool, default=True
        If True the ellipsoid is centered at the origin, which is the right model
        for point clouds symmetric under ``x -> -x``. Otherwise the lifted
        formulation also fits the center.

    tol : float, default=1e-4
        The iteration stops once every point satisfies ``M_i <= d (1 + tol)``,
        i.e. the ellipsoid is within a factor ``1 + tol`` of optimal.

    max_iter : int, default=100000
        Iteration cap.

    Attributes
    ----------
    shape_ : np.ndarray, shape (n_features, n_features)
        Positive definite matrix of the ellipsoid.

    center_ : np.ndarray, shape (n_features,)
        Center of the ellipsoid.

    weights_ : np.ndarray, shape (n_samples,)
        Final Khachiyan weights; they concentrate on the contact points.

    n_iter_ : int
        Number of iterations run.

    See Also
    --------
    dms.matweight.reducing_operator
    """

    def __init__(
        self, centered: bool = True, tol: float = 1e-4, max_iter: int = 100000
    ):
        self.centered = centered
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X: np.ndarray, y: Optional[Any] = None) -> "MinimumVolumeEllipsoid":
        """
        Fits the ellipsoid to the rows of ``X``.

        Parameters
        ----------
        X : array-like, shape (n_samples, n_features)
            Points to enclose.

        y : ignored

        Returns
        -------
        self

        Raises
        ------
        ValueError
            If there are not more points than dimensions.
        RuntimeError
            If ``max_iter`` iterations do not reach ``tol``.
        """
        X = check_array(X, dtype=float)
        n_samples, n_features = X.shape
        if n_samples <= n_features:
            raise ValueError(
                "The number of points must be larger than the number of dimensions."
            )
        if self.centered:
            lifted = X.T
        else:
            lifted = np.vstack([X.T, np.ones(n_samples)])
        d = lifted.shape[0]
        u = np.full(n_samples, 1.0 / n_samples)
        for iteration in range(self.max_iter):
            scatter = (lifted * u) @ lifted.T
            M = np.einsum("ij,ij->j", lifted, np.linalg.solve(scatter, lifted))
            j = int(np.argmax(M))
            maximum = M[j]
            if maximum <= d * (1 + self.tol):
                break
            step = (maximum - d) / (d * (maximum - 1))
            u = (1 - step) * u
            u[j] += step
        else:
            raise RuntimeError(
                f"Khachiyan iteration did not reach tol={self.tol} in "
                f"{self.max_iter} iterations"
            )
        self.n_iter_ = iteration
        self.weights_ = u
        if self.centered:
            self.center_ = np.zeros(n_features)
            shape = np.linalg.inv((X.T * u) @ X)
        else:
            self.center_ = X.T @ u
            spread = (X.T * u) @ X - np.outer(self.center_, self.center_)
            shape = np.linalg.inv(spread)
        offsets = X - self.center_
        reach = np.einsum("ij,jk,ik->i", offsets, shape, offsets)
        self.shape_ = shape / reach.max()
        logger.info(
            f"Ellipsoid fit on {n_samples} points in R^{n_features} converged after "
            f"{iteration} iterations"
        )
        return self

    def gauge(self, X: np.ndarray) -> np.ndarray:
        """``sqrt((x - c)^T A (x - c))`` per row; at most one for enclosed points."""
        offsets = np.atleast_2d(X) - self.center_
        return np.sqrt(np.einsum("ij,jk,ik->i", offsets, self.shape_, offsets))
