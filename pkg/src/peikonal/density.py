"""k-nearest neighbor density estimates and density weighted right-hand sides."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DegenerateScaleError, ParameterError
from .graph import _as_points, knn_search

__all__ = ["DensityField", "DensityParams", "knn_density", "rhs_from_density"]


@dataclass
class DensityField:
    values: np.ndarray
    intrinsic_dim: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not (np.all(np.isfinite(v)) and np.all(v > 0)):
            raise ParameterError("density values must be positive and finite")
        self.values = v


@dataclass(frozen=True)
class DensityParams:
    k: int = 30
    alpha: float = 1.0
    intrinsic_dim: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be >= 1")


def knn_density(points, params=None, normalize=True):
    """Estimate ``rho(x_i) = k / (n omega_m r_k(x_i)^m)``.

    ``m`` is ``params.intrinsic_dim`` (ambient dimension by default) and
    ``omega_m`` the volume of the unit m-ball. The computation is done in log
    space, so large ``m`` does not overflow. With ``normalize`` (default) the
    field is divided by its mean; only relative density matters downstream.
    """
    params = params or DensityParams()
    X = _as_points(points)
    n, d = X.shape
    k = params.k
    if n <= k:
        raise ParameterError(f"need n > k, got n={n}, k={k}")
    m = params.intrinsic_dim or d
    _, dist = knn_search(X, k)
    rk = dist[:, -1]
    if np.any(rk == 0):
        raise DegenerateScaleError("zero k-th neighbor distance (duplicate points)")
    log_omega = 0.5 * m * np.log(np.pi) - gammaln(0.5 * m + 1.0)
    logrho = np.log(k) - np.log(n) - log_omega - m * np.log(rk)
    if normalize:
        logrho = logrho - (logsumexp(logrho) - np.log(n))
    return DensityField(np.exp(logrho), m)


def rhs_from_density(density, alpha):
    """f = rho^(-alpha)."""
    rho = density.values if isinstance(density, DensityField) else np.asarray(density, dtype=np.float64)
    if np.any(rho <= 0):
        raise ParameterError("density must be positive")
    return rho ** (-float(alpha))
