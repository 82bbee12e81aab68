"""Gaussian-process posterior over the archive's behavior cells.

The prior mean at each cell is the prior agent's recorded performance there;
the covariance is a Matern-5/2 kernel on normalized cell centroids,

    k(x, x') = s^2 (1 + sqrt(5) r + (5/3) r^2) exp(-sqrt(5) r),
    r = ||x - x'|| / lengthscale.

Conditioning on observed (cell, performance) pairs uses the standard
residual update: the posterior mean adds k~^T K^-1 (f - mu0) to the prior
mean, with K the observation Gram matrix plus noise on the diagonal, so with
no observations the posterior is exactly the prior map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular

_SQRT5 = math.sqrt(5.0)

# Jitter ladder tried when a Gram matrix fails to factor as-is.
JITTERS = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


class GPFactorizationError(RuntimeError):
    """Gram matrix not positive definite even at maximum jitter."""


@dataclass(frozen=True)
class Matern52Kernel:
    amplitude: float = 1.0
    lengthscale: float = 1.0
    noise_variance: float = 0.1

    def __post_init__(self):
        if self.amplitude <= 0 or self.lengthscale <= 0:
            raise ValueError("amplitude and lengthscale must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")


def matern52(x, y, kernel: Matern52Kernel = Matern52Kernel()) -> float:
    """Kernel value for a single pair of points."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = float(np.sqrt(np.dot(diff, diff))) / kernel.lengthscale
    return (kernel.amplitude ** 2) * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r * r) \
        * math.exp(-_SQRT5 * r)


def _cross(kernel: Matern52Kernel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kernel matrix between row-stacked point sets a (n,d) and b (m,d)."""
    diff = a[:, None, :] - b[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2)) / kernel.lengthscale
    return (kernel.amplitude ** 2) * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r * r) \
        * np.exp(-_SQRT5 * r)


def gram_matrix(kernel: Matern52Kernel, points: np.ndarray) -> np.ndarray:
    """Noise-free Gram matrix of a point set."""
    return _cross(kernel, points, points)


def cholesky_with_jitter(matrix: np.ndarray, jitters=JITTERS) -> np.ndarray:
    """Lower Cholesky factor, escalating diagonal jitter on failure."""
    eye = np.eye(matrix.shape[0])
    for jitter in (0.0, *jitters):
        try:
            return cholesky(matrix + jitter * eye, lower=True)
        except np.linalg.LinAlgError:
            continue
    raise GPFactorizationError(
        f"matrix of size {matrix.shape[0]} not PD at jitter {jitters[-1]:g}")


class GPPosterior:
    """Posterior over a fixed discrete domain of cells.

    `coordinates` maps each cell id to its point in kernel space and
    `prior_mean` to the prior performance there. Observations arrive one at
    a time through observe(); predictions are available for every domain
    cell at once (predict_all) or per cell (predict).
    """

    def __init__(self, kernel: Matern52Kernel, coordinates: dict, prior_mean: dict):
        if set(coordinates) != set(prior_mean):
            raise ValueError("coordinates and prior_mean must cover the same cells")
        if not coordinates:
            raise ValueError("empty GP domain")
        self.kernel = kernel
        self.cells = sorted(coordinates)
        self._index = {cell: i for i, cell in enumerate(self.cells)}
        self._X = np.array([coordinates[c] for c in self.cells], dtype=float)
        self._mu0 = np.array([prior_mean[c] for c in self.cells], dtype=float)
        self.observations: list = []  # (cell, performance)
        self._obs_idx: list = []
        self._chol = None
        self._alpha = None

    @property
    def n_observations(self) -> int:
        return len(self.observations)

    def prior_mean(self, cell) -> float:
        return float(self._mu0[self._index[cell]])

    def observe(self, cell, value: float) -> None:
        if cell not in self._index:
            raise KeyError(f"cell {cell} not in GP domain")
        self.observations.append((cell, float(value)))
        self._obs_idx.append(self._index[cell])
        X = self._X[self._obs_idx]
        K = gram_matrix(self.kernel, X) \
            + self.kernel.noise_variance * np.eye(len(self._obs_idx))
        self._chol = cholesky_with_jitter(K)
        resid = (np.array([v for _, v in self.observations])
                 - self._mu0[self._obs_idx])
        tmp = solve_triangular(self._chol, resid, lower=True)
        self._alpha = solve_triangular(self._chol.T, tmp, lower=False)

    def predict_all(self) -> tuple:
        """(means, variances) over the whole domain, in sorted-cell order."""
        prior_var = self.kernel.amplitude ** 2
        if not self.observations:
            return self._mu0.copy(), np.full(len(self.cells), prior_var)
        cross = _cross(self.kernel, self._X, self._X[self._obs_idx])
        means = self._mu0 + cross @ self._alpha
        V = solve_triangular(self._chol, cross.T, lower=True)
        variances = prior_var - np.sum(V * V, axis=0)
        np.clip(variances, 0.0, None, out=variances)
        return means, variances

    def predict(self, cell) -> tuple:
        """(mean, variance) at one domain cell."""
        if cell not in self._index:
            raise KeyError(f"cell {cell} not in GP domain")
        means, variances = self.predict_all()
        i = self._index[cell]
        return float(means[i]), float(variances[i])
