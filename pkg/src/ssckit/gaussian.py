"""Gaussian source model and conditional-variance algebra.

The normalized model is ``Y_l = X + N_l`` with independent zero-mean
Gaussian noises, so the covariance of any subset of observations is
``sigma_x2 * ones + diag(noise_vars)``.  Every quantity the trade-off
region needs reduces to the aggregate precision of a subset,

    tr_S = sum_{l in S} 1 / noise_var_l,

because the scalar ``sum_l Y_l / noise_var_l`` carries all information
about ``X`` contained in the vector observation.  All rates are in bits
(base-2 logarithms throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    InfeasibleDistortionError,
    InvalidParameterError,
    SingularModelError,
)

# Relative eigenvalue floor below which a residual covariance is treated
# as singular in normalize().
PD_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SourceModel:
    """Source variance and per-user noise variances of the normalized model."""

    sigma_x2: float
    noise_vars: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma_x2", float(self.sigma_x2))
        object.__setattr__(self, "noise_vars",
                           tuple(float(v) for v in self.noise_vars))
        if not self.sigma_x2 > 0:
            raise InvalidParameterError("sigma_x2 must be positive")
        if not self.noise_vars:
            raise InvalidParameterError("at least one user is required")
        if any(not v > 0 for v in self.noise_vars):
            raise InvalidParameterError("noise variances must be positive")

    @property
    def num_users(self) -> int:
        return len(self.noise_vars)

    def trace_inv(self, members: Iterable[int]) -> float:
        """Aggregate precision ``sum(1/noise_var)`` of a subset (0 for empty)."""
        return sum(1.0 / self.noise_vars[m - 1] for m in members)

    def to_dict(self) -> dict:
        return {"sigma_x2": self.sigma_x2, "noise_vars": list(self.noise_vars)}

    @classmethod
    def from_dict(cls, data: dict) -> "SourceModel":
        try:
            return cls(float(data["sigma_x2"]),
                       tuple(float(v) for v in data["noise_vars"]))
        except KeyError as exc:
            raise InvalidParameterError(f"missing model field: {exc}") from exc


@dataclass(frozen=True)
class ScalarChannel:
    """Scalar reduction ``Y~ = gain * X + N~`` of a vector observation."""

    gain: float
    noise_var: float

    def __post_init__(self):
        if not self.noise_var > 0:
            raise InvalidParameterError("noise_var must be positive")


@dataclass(eq=False)
class RawGaussianObservation:
    """Unnormalized jointly Gaussian observation of a scalar source.

    ``cross_cov[i] = Cov(X, Y_i)`` and ``obs_cov = Cov(Y)``.
    """

    cross_cov: np.ndarray
    obs_cov: np.ndarray

    def __post_init__(self):
        self.cross_cov = np.asarray(self.cross_cov, dtype=float).reshape(-1)
        self.obs_cov = np.asarray(self.obs_cov, dtype=float)
        k = self.cross_cov.shape[0]
        if self.obs_cov.shape != (k, k):
            raise InvalidParameterError("cross_cov and obs_cov dimensions disagree")
        if not np.allclose(self.obs_cov, self.obs_cov.T):
            raise InvalidParameterError("obs_cov must be symmetric")


def normalize(raw: RawGaussianObservation, sigma_x2: float):
    """Whiten a raw observation into gain-vector form with unit noise.

    Writes ``Y = cross_cov / sigma_x2 * X + N'`` with residual covariance
    ``obs_cov - outer(cross_cov, cross_cov) / sigma_x2``, then applies the
    Cholesky factor ``C`` of that residual so the transformed observation
    is ``Y' = h X + N''`` with ``N''`` of identity covariance.

    Returns
    -------
    (h, noise_cov) : (ndarray, ndarray)
        The gain vector ``h`` and the whitened residual covariance, which
        is the identity up to floating-point error.

    Raises
    ------
    SingularModelError
        If the residual covariance is not positive definite (some
        observation is a deterministic function of the source and the
        others).
    """
    if not sigma_x2 > 0:
        raise InvalidParameterError("sigma_x2 must be positive")
    residual = raw.obs_cov - np.outer(raw.cross_cov, raw.cross_cov) / sigma_x2
    eigvals = np.linalg.eigvalsh(residual)
    if eigvals[0] <= PD_TOLERANCE * max(eigvals[-1], 0.0):
        raise SingularModelError(
            "residual observation covariance is not positive definite"
        )
    chol = np.linalg.cholesky(residual)
    h = np.linalg.solve(chol, raw.cross_cov / sigma_x2)
    noise_cov = np.linalg.solve(chol, np.linalg.solve(chol, residual).T).T
    return h, noise_cov


def sufficient_statistic(model: SourceModel, members: Iterable[int]) -> ScalarChannel:
    """Scalar channel equivalent to observing the whole subset.

    For diagonal noise the matched filter ``sum_l Y_l / noise_var_l`` has
    gain and noise variance both equal to the aggregate precision of the
    subset, and it loses no information about the source.
    """
    members = _checked_members(model, members)
    tr = model.trace_inv(members)
    return ScalarChannel(gain=tr, noise_var=tr)


def cond_var_given_side_info(model: SourceModel, members: Iterable[int]) -> float:
    """Residual variance of X after observing a subset of users.

    Equals ``sigma_x2 / (tr_S * sigma_x2 + 1)`` where ``tr_S`` is the
    subset's aggregate precision.
    """
    members = _checked_members(model, members)
    tr = model.trace_inv(members)
    return model.sigma_x2 / (tr * model.sigma_x2 + 1.0)


def cond_var_given_v_and_y(gain: float, noise_var: float,
                           cond_var_given_v: float) -> float:
    """Residual variance of X given both a Gaussian helper V and Y = gain*X + N.

    For jointly Gaussian (V, X) with Var(X|V) = ``cond_var_given_v`` and N
    independent of (V, X):

        Var(X | V, Y) = noise_var * Var(X|V) / (gain^2 * Var(X|V) + noise_var)
    """
    if not (noise_var > 0 and cond_var_given_v > 0):
        raise InvalidParameterError("variances must be positive")
    s = cond_var_given_v
    return noise_var * s / (gain * gain * s + noise_var)


def f_of_d(model: SourceModel, a_star: Iterable[int], distortion: float) -> float:
    """Helper-variance budget equivalent to a target distortion.

    Translates the constraint Var(X|V, Y_A) <= D into the constraint
    Var(X|V) <= D / (1 - tr_A * D), valid while ``tr_A < 1/D``.
    """
    members = _checked_members(model, a_star)
    tr = model.trace_inv(members)
    if not distortion > 0:
        raise InvalidParameterError("distortion must be positive")
    denom = 1.0 - tr * distortion
    if denom <= 0:
        raise InfeasibleDistortionError(
            f"distortion {distortion} requires aggregate precision < {1.0 / distortion},"
            f" got {tr}"
        )
    return distortion / denom

def mutual_info_x_yb(model: SourceModel, members: Iterable[int]) -> float:
    """Information (bits) the subset's observations alone carry about X."""
    members = _checked_members(model, members)
    tr = model.trace_inv(members)
    return 0.5 * math.log2(1.0 + model.sigma_x2 * tr)


def _checked_members(model: SourceModel, members: Iterable[int]) -> frozenset[int]:
    s = frozenset(int(m) for m in members)
    if not s:
        raise InvalidParameterError("subset must be nonempty")
    for m in s:
        if not 1 <= m <= model.num_users:
            raise InvalidParameterError(f"user index {m} outside 1..{model.num_users}")
    return s
