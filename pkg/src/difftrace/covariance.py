"""Sample covariances for the two observation groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import PSD_TOL, as_symmetric


def check_observations(data, name: str = "data") -> np.ndarray:
    """Validate an n x p observation matrix: n >= 2 rows, all entries finite."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"{name} must be 2-d (rows = observations), got ndim={data.ndim}")
    if data.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 observations, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        i, j = np.argwhere(~np.isfinite(data))[0]
        raise ValueError(f"{name} has a non-finite value at row {i + 1}, column {j + 1}")
    return data


def sample_covariance(data, ddof: int = 0, name: str = "data") -> np.ndarray:
    """Sample covariance of an n x p observation matrix.

    Columns are mean-centered first. The default ``ddof=0`` gives the 1/n
    (maximum-likelihood) normalization; ``ddof=1`` switches to 1/(n-1).
    The output is symmetrized exactly.
    """
    data = check_observations(data, name)
    if ddof not in (0, 1):
        raise ValueError(f"ddof must be 0 or 1, got {ddof}")
    n = data.shape[0]
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / (n - ddof)
    return (cov + cov.T) / 2.0


@dataclass(frozen=True)
class CovariancePair:
    """Sample covariances (sigma_x, sigma_y) with their group sizes."""

    sigma_x: np.ndarray
    sigma_y: np.ndarray
    n_x: int
    n_y: int

    def __post_init__(self):
        object.__setattr__(self, "sigma_x", np.asarray(self.sigma_x, dtype=float))
        object.__setattr__(self, "sigma_y", np.asarray(self.sigma_y, dtype=float))
        if self.sigma_x.shape != self.sigma_y.shape:
            raise ValueError(
                f"dimension mismatch: sigma_x is {self.sigma_x.shape}, "
                f"sigma_y is {self.sigma_y.shape}"
            )

    @property
    def p(self) -> int:
        return self.sigma_x.shape[0]


def build_pair(x, y, ddof: int = 0) -> CovariancePair:
    """Covariance pair from the two raw observation matrices.

    Both groups must observe the same p variables. PSD-ness of the outputs is
    validated (up to the -1e-8 eigenvalue tolerance).
    """
    x = check_observations(x, "group X")
    y = check_observations(y, "group Y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"variable-count mismatch: group X has p={x.shape[1]}, group Y has p={y.shape[1]}"
        )
    sigma_x = sample_covariance(x, ddof=ddof, name="group X")
    sigma_y = sample_covariance(y, ddof=ddof, name="group Y")
    for name, sigma in (("sigma_x", sigma_x), ("sigma_y", sigma_y)):
        min_eig = float(np.linalg.eigvalsh(sigma)[0])
        if min_eig < -PSD_TOL:
            raise ValueError(f"{name} is not PSD: min eigenvalue {min_eig:.3e}")
    return CovariancePair(sigma_x, sigma_y, x.shape[0], y.shape[0])


def pair_from_covariances(sigma_x, sigma_y, n_x: int, n_y: int) -> CovariancePair:
    """Covariance pair from precomputed matrices (symmetrized, PSD-checked)."""
    sigma_x = as_symmetric(sigma_x, "sigma_x")
    sigma_y = as_symmetric(sigma_y, "sigma_y")
    pair = CovariancePair(sigma_x, sigma_y, int(n_x), int(n_y))
    for name, sigma in (("sigma_x", sigma_x), ("sigma_y", sigma_y)):
        min_eig = float(np.linalg.eigvalsh(sigma)[0])
        if min_eig < -PSD_TOL:
            raise ValueError(f"{name} is not PSD: min eigenvalue {min_eig:.3e}")
    return pair
