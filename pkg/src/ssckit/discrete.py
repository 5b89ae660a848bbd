"""Finite-alphabet source specifications and their achievable bounds.

A :class:`DiscreteSourceSpec` packages a joint pmf over the source and
the per-user observations together with the two-layer helper chain
``P(v | x)`` and ``P(u | v)`` (so the full joint factors as
``P(x, y) P(v|x) P(u|v)``), a bounded distortion matrix, and optional
per-authorized-set reconstruction tables.  Everything downstream (the
binning simulator, the exact leakage estimator, the achievable-region
bounds) consumes this object.

Axis convention for the full joint tensor: ``(x, y_1, ..., y_L, v, u)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.stats import norm

from .access import AccessStructure
from .errors import (
    InvalidParameterError,
    NumericError,
    ResourceLimitError,
)
from .gaussian import SourceModel

PMF_ATOL = 1e-12
# Cap on the number of joint cells a quantizer call may produce.
MAX_QUANTIZER_CELLS = 1 << 16


def entropy_bits(pmf: np.ndarray) -> float:
    """Shannon entropy in bits; zero cells contribute nothing."""
    p = np.asarray(pmf, dtype=float).reshape(-1)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def marginal(joint: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Marginal of ``joint`` onto the listed axes, in the listed order."""
    keep = tuple(keep)
    drop = tuple(ax for ax in range(joint.ndim) if ax not in keep)
    out = joint.sum(axis=drop) if drop else joint
    if keep and list(keep) != sorted(keep):
        sorted_keep = sorted(keep)
        out = np.transpose(out, [sorted_keep.index(k) for k in keep])
    return out


def mutual_information_bits(joint: np.ndarray, axes_a: Sequence[int],
                            axes_b: Sequence[int],
                            given: Sequence[int] = ()) -> float:
    """I(A; B | C) in bits from a joint pmf tensor.

    Empty axis groups are allowed and behave as constants (zero
    information).  Uses H(A,C) + H(B,C) - H(A,B,C) - H(C).
    """
    a, b, c = tuple(axes_a), tuple(axes_b), tuple(given)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise InvalidParameterError("axis groups must be disjoint")
    h = entropy_bits
    value = (h(marginal(joint, a + c)) + h(marginal(joint, b + c))
             - h(marginal(joint, a + b + c)) - h(marginal(joint, c)))
    return max(0.0, value)


def _check_rows(name: str, matrix: np.ndarray):
    if np.any(matrix < -PMF_ATOL):
        raise InvalidParameterError(f"{name} has negative entries")
    sums = matrix.sum(axis=-1)
    if not np.allclose(sums, 1.0, atol=PMF_ATOL):
        raise InvalidParameterError(f"{name} rows must sum to 1")


@dataclass(eq=False)
class DiscreteSourceSpec:
    """Joint pmf, helper chain, and distortion data for a discrete source."""

    joint_xy: np.ndarray
    v_given_x: np.ndarray
    u_given_v: np.ndarray
    distortion: np.ndarray
    x_values: tuple[float, ...] | None = None
    xhat_values: tuple[float, ...] | None = None
    reconstructions: dict | None = None

    def __post_init__(self):
        self.joint_xy = np.asarray(self.joint_xy, dtype=float)
        self.v_given_x = np.asarray(self.v_given_x, dtype=float)
        self.u_given_v = np.asarray(self.u_given_v, dtype=float)
        self.distortion = np.asarray(self.distortion, dtype=float)
        if self.joint_xy.ndim < 2:
            raise InvalidParameterError("joint_xy needs at least one user axis")
        total = self.joint_xy.sum()
        if np.any(self.joint_xy < -PMF_ATOL) or abs(total - 1.0) > PMF_ATOL:
            raise InvalidParameterError("joint_xy must be a pmf")
        if self.v_given_x.shape[0] != self.x_size:
            raise InvalidParameterError("v_given_x rows must match |X|")
        if self.u_given_v.shape[0] != self.v_size:
            raise InvalidParameterError("u_given_v rows must match |V|")
        _check_rows("v_given_x", self.v_given_x)
        _check_rows("u_given_v", self.u_given_v)
        if self.distortion.shape[0] != self.x_size:
            raise InvalidParameterError("distortion rows must match |X|")
        if np.any(self.distortion < 0) or not np.all(np.isfinite(self.distortion)):
            raise InvalidParameterError("distortion must be finite and nonnegative")
        if self.reconstructions:
            self.reconstructions = {frozenset(k): np.asarray(v, dtype=int)
                                    for k, v in self.reconstructions.items()}
        self._recon_cache = dict(self.reconstructions or {})

    # -- shapes ---------------------------------------------------------

    @property
    def x_size(self) -> int:
        return self.joint_xy.shape[0]

    @property
    def y_sizes(self) -> tuple[int, ...]:
        return self.joint_xy.shape[1:]

    @property
    def num_users(self) -> int:
        return self.joint_xy.ndim - 1

    @property
    def v_size(self) -> int:
        return self.v_given_x.shape[1]

    @property
    def u_size(self) -> int:
        return self.u_given_v.shape[1]

    @property
    def xhat_size(self) -> int:
        return self.distortion.shape[1]

    @property
    def d_max(self) -> float:
        return float(self.distortion.max())

    # -- joint tensors ---------------------------------------------------

    def full_joint(self) -> np.ndarray:
        """P(x, y_1..L, v, u) with axes in that order."""
        left = self.joint_xy[..., None, None]
        v_shape = (self.x_size,) + (1,) * self.num_users + (self.v_size, 1)
        u_shape = (1,) * (1 + self.num_users) + (self.v_size, self.u_size)
        return left * self.v_given_x.reshape(v_shape) * self.u_given_v.reshape(u_shape)

    def axis_x(self) -> int:
        return 0

    def axes_y(self, members: Iterable[int]) -> tuple[int, ...]:
        return tuple(sorted(int(m) for m in members))

    def axis_v(self) -> int:
        return self.num_users + 1

    def axis_u(self) -> int:
        return self.num_users + 2

    def pmf_x(self) -> np.ndarray:
        return marginal(self.full_joint(), (self.axis_x(),))

    # -- reconstruction ---------------------------------------------------

    def reconstruction_for(self, members: Iterable[int]) -> np.ndarray:
        """Reconstruction table indexed ``[v, y_a1, ..., y_ak] -> xhat``.

        Explicit tables supplied at construction win; otherwise the
        distortion-minimizing symbolwise estimate under the spec pmf is
        computed and cached.
        """
        key = frozenset(int(m) for m in members)
        if key not in self._recon_cache:
            self._recon_cache[key] = self._bayes_table(key)
        return self._recon_cache[key]

    def _bayes_table(self, members: frozenset[int]) -> np.ndarray:
        axes = (self.axis_v(),) + self.axes_y(members) + (self.axis_x(),)
        post = marginal(self.full_joint(), axes)
        # post has shape (|V|, |Y_a1|, ..., |Y_ak|, |X|)
        cost = post @ self.distortion          # (..., |Xhat|)
        return np.argmin(cost, axis=-1)

    def expected_distortion(self, members: Iterable[int]) -> float:
        """Mean distortion of the symbolwise rule for one authorized set."""
        members = frozenset(int(m) for m in members)
        table = self.reconstruction_for(members)
        axes = (self.axis_v(),) + self.axes_y(members) + (self.axis_x(),)
        post = marginal(self.full_joint(), axes)
        # distortion.T[table][cell, x] = distortion[x, table[cell]]
        d_of_cell = self.distortion.T[table]
        return float((post * d_of_cell).sum())

    def target_distortion(self, structure: AccessStructure) -> float:
        """Largest per-set expected distortion over minimal authorized sets."""
        return max(self.expected_distortion(a) for a in structure.minimal_sets)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        data = {
            "x_size": self.x_size,
            "y_sizes": list(self.y_sizes),
            "v_size": self.v_size,
            "u_size": self.u_size,
            "xhat_size": self.xhat_size,
            "joint_xy": self.joint_xy.reshape(-1).tolist(),
            "v_given_x": self.v_given_x.reshape(-1).tolist(),
            "u_given_v": self.u_given_v.reshape(-1).tolist(),
            "distortion": self.distortion.reshape(-1).tolist(),
        }
        if self.x_values is not None:
            data["x_values"] = list(self.x_values)
        if self.xhat_values is not None:
            data["xhat_values"] = list(self.xhat_values)
        if self.reconstructions:
            data["reconstructions"] = {
                ",".join(map(str, sorted(k))): v.reshape(-1).tolist()
                for k, v in self.reconstructions.items()
            }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteSourceSpec":
        try:
            x_size = int(data["x_size"])
            y_sizes = tuple(int(s) for s in data["y_sizes"])
            v_size = int(data["v_size"])
            u_size = int(data["u_size"])
            xhat_size = int(data["xhat_size"])
            joint = np.asarray(data["joint_xy"], dtype=float).reshape(
                (x_size,) + y_sizes)
            v_given_x = np.asarray(data["v_given_x"], dtype=float).reshape(
                (x_size, v_size))
            u_given_v = np.asarray(data["u_given_v"], dtype=float).reshape(
                (v_size, u_size))
            dist = np.asarray(data["distortion"], dtype=float).reshape(
                (x_size, xhat_size))
        except (KeyError, ValueError) as exc:
            raise InvalidParameterError(f"bad source spec: {exc}") from exc
        recon = None
        if "reconstructions" in data:
            recon = {}
            for key, flat in data["reconstructions"].items():
                members = frozenset(int(m) for m in key.split(","))
                shape = (v_size,) + tuple(y_sizes[m - 1] for m in sorted(members))
                recon[members] = np.asarray(flat, dtype=int).reshape(shape)
        return cls(
            joint_xy=joint, v_given_x=v_given_x, u_given_v=u_given_v,
            distortion=dist,
            x_values=tuple(data["x_values"]) if "x_values" in data else None,
            xhat_values=tuple(data["xhat_values"]) if "xhat_values" in data else None,
            reconstructions=recon,
        )


@dataclass(frozen=True)
class DiscreteRegionBounds:
    """Achievable bounds and internal rate thresholds of the layered scheme.

    ``rate_bound`` and ``leakage_bound`` are the reduced two-inequality
    description; the ``i_*`` fields are the layer thresholds the code
    construction must respect (codeword-rate floors for each layer, bin
    capacity ceilings for the recoverable part, and the floor on leakage
    minus the refinement bin index rate).
    """

    rate_bound: float
    leakage_bound: float
    i_u_x: float
    i_v_x_given_u: float
    min_i_v_ya: float
    min_i_v_ya_given_u: float
    max_i_x_uyb: float

    @property
    def pre_reduction_rate(self) -> float:
        """Best total public rate permitted by the layer thresholds."""
        return self.i_u_x + self.i_v_x_given_u - self.min_i_v_ya

    @property
    def pre_reduction_leakage(self) -> float:
        """Best leakage permitted by the layer thresholds."""
        return (self.i_v_x_given_u - self.min_i_v_ya_given_u
                + self.max_i_x_uyb)

    def to_dict(self) -> dict:
        return {
            "rate_bound": self.rate_bound,
            "leakage_bound": self.leakage_bound,
            "i_u_x": self.i_u_x,
            "i_v_x_given_u": self.i_v_x_given_u,
            "min_i_v_ya": self.min_i_v_ya,
            "min_i_v_ya_given_u": self.min_i_v_ya_given_u,
            "max_i_x_uyb": self.max_i_x_uyb,
        }


def rate_region_discrete(spec: DiscreteSourceSpec,
                         structure: AccessStructure) -> DiscreteRegionBounds:
    """Achievable (rate, leakage) bounds of the layered binning scheme.

    The rate bound is the largest ``I(V; X | Y_A)`` over authorized sets
    and the leakage bound the largest
    ``I(V; X) - I(V; Y_A | U) + I(X; Y_B | U)`` over authorized /
    unauthorized pairs.  Both optimizations restrict to minimal authorized
    and maximal unauthorized sets, where they are attained (conditioning
    on more observations only moves each term the same way).
    """
    if structure.num_users != spec.num_users:
        raise InvalidParameterError("structure and spec user counts disagree")
    joint = spec.full_joint()
    ax, av, au = spec.axis_x(), spec.axis_v(), spec.axis_u()
    minimal = structure.minimal_sets
    unauth = structure.unauthorized_maximal_sets()

    i_v_x = mutual_information_bits(joint, (av,), (ax,))
    i_u_x = mutual_information_bits(joint, (au,), (ax,))
    i_v_x_given_u = mutual_information_bits(joint, (av,), (ax,), (au,))

    i_v_ya = {a: mutual_information_bits(joint, (av,), spec.axes_y(a))
              for a in minimal}
    i_v_ya_given_u = {a: mutual_information_bits(joint, (av,), spec.axes_y(a), (au,))
                      for a in minimal}
    i_x_yb_given_u = {b: mutual_information_bits(joint, (ax,), spec.axes_y(b), (au,))
                      for b in unauth}

    rate_bound = max(mutual_information_bits(joint, (av,), (ax,), spec.axes_y(a))
                     for a in minimal)
    leakage_bound = max(i_v_x - i_v_ya_given_u[a] + i_x_yb_given_u[b]
                        for a in minimal for b in unauth)
    max_i_x_uyb = max(
        mutual_information_bits(joint, (ax,), (au,) + spec.axes_y(b))
        for b in unauth)
    return DiscreteRegionBounds(
        rate_bound=rate_bound,
        leakage_bound=leakage_bound,
        i_u_x=i_u_x,
        i_v_x_given_u=i_v_x_given_u,
        min_i_v_ya=min(i_v_ya.values()),
        min_i_v_ya_given_u=min(i_v_ya_given_u.values()),
        max_i_x_uyb=max_i_x_uyb,
    )


# -- Gaussian-to-discrete quantization ------------------------------------

def _equiprobable_edges(std: float, levels: int) -> np.ndarray:
    quantiles = np.arange(1, levels) / levels
    inner = norm.ppf(quantiles) * std
    return np.concatenate(([-np.inf], inner, [np.inf]))


def _cell_means(std: float, edges: np.ndarray) -> np.ndarray:
    alpha = edges[:-1] / std
    beta = edges[1:] / std
    prob = norm.cdf(beta) - norm.cdf(alpha)
    return std * (norm.pdf(alpha) - norm.pdf(beta)) / prob


def quantized_joint_pmf(sigma_x2: float, gain: float, noise_var: float,
                        levels: int):
    """Equiprobable quantization of the pair (X, gain*X + N).

    Returns ``(pmf, x_reps, y_reps)`` where ``pmf[i, j]`` is the exact
    probability of the cell rectangle (computed by adaptive quadrature of
    the conditional Gaussian over each source cell) and the reps are the
    per-cell conditional means of the marginals.
    """
    if levels < 2:
        raise InvalidParameterError("levels must be at least 2")
    if not noise_var > 0:
        raise InvalidParameterError("noise_var must be positive")
    x_std = float(np.sqrt(sigma_x2))
    y_std = float(np.sqrt(gain * gain * sigma_x2 + noise_var))
    n_std = float(np.sqrt(noise_var))
    x_edges = _equiprobable_edges(x_std, levels)
    y_edges = _equiprobable_edges(y_std, levels)
    pmf = np.empty((levels, levels))
    for i in range(levels):
        lo, hi = x_edges[i], x_edges[i + 1]
        for j in range(levels):
            c, d = y_edges[j], y_edges[j + 1]

            def integrand(x, c=c, d=d):
                return (norm.pdf(x, scale=x_std)
                        * (norm.cdf((d - gain * x) / n_std)
                           - norm.cdf((c - gain * x) / n_std)))

            val, _ = integrate.quad(integrand, lo, hi,
                                    epsabs=1e-12, epsrel=1e-10, limit=200)
            pmf[i, j] = val
    if not np.all(np.isfinite(pmf)):
        raise NumericError("quantizer integration produced non-finite mass")
    total = pmf.sum()
    if abs(total - 1.0) > 1e-6:
        raise NumericError(f"quantizer mass {total} too far from 1")
    pmf = np.clip(pmf, 0.0, None) / total
    return pmf, _cell_means(x_std, x_edges), _cell_means(y_std, y_edges)


def quantized_mutual_information(sigma_x2: float, trace: float,
                                 levels: int) -> float:
    """Bits between the source and a quantized aggregate observation."""
    pmf, _, _ = quantized_joint_pmf(sigma_x2, trace, trace, levels)
    return mutual_information_bits(pmf, (0,), (1,))


def quantize_gaussian(model: SourceModel, levels: int,
                      subsets: Sequence[Iterable[int]]) -> DiscreteSourceSpec:
    """Discretize a Gaussian model into a finite-alphabet spec.

    Each subset is collapsed to its scalar aggregate observation and
    quantized into ``levels`` equiprobable cells, as is the source; the
    joint pmf is computed by quadrature.  Subsets must be pairwise
    disjoint so the aggregates are conditionally independent given the
    source.  The helper chain of the returned spec is the identity
    (``V = X``) with a constant coarse layer, and the distortion is
    squared error between cell representatives.
    """
    if levels < 2:
        raise InvalidParameterError("levels must be at least 2")
    subs = [frozenset(int(m) for m in s) for s in subsets]
    if not subs or any(not s for s in subs):
        raise InvalidParameterError("subsets must be nonempty")
    if len(frozenset().union(*subs)) != sum(len(s) for s in subs):
        raise InvalidParameterError("subsets must be pairwise disjoint")
    cells = levels ** (1 + len(subs))
    if cells > MAX_QUANTIZER_CELLS:
        raise ResourceLimitError(f"{cells} joint cells exceed the quantizer cap")

    x_std = float(np.sqrt(model.sigma_x2))
    x_edges = _equiprobable_edges(x_std, levels)
    gains = [model.trace_inv(s) for s in subs]
    chan_edges = []
    for g in gains:
        y_std = float(np.sqrt(g * g * model.sigma_x2 + g))
        chan_edges.append(_equiprobable_edges(y_std, levels))

    shape = (levels,) * (1 + len(subs))
    pmf = np.empty(shape)
    for idx in itertools.product(range(levels), repeat=1 + len(subs)):
        lo, hi = x_edges[idx[0]], x_edges[idx[0] + 1]

        def integrand(x, idx=idx):
            val = norm.pdf(x, scale=x_std)
            for k, (g, edges) in enumerate(zip(gains, chan_edges)):
                n_std = np.sqrt(g)
                j = idx[1 + k]
                val *= (norm.cdf((edges[j + 1] - g * x) / n_std)
                        - norm.cdf((edges[j] - g * x) / n_std))
            return val

        val, _ = integrate.quad(integrand, lo, hi,
                                epsabs=1e-12, epsrel=1e-10, limit=200)
        pmf[idx] = val
    if not np.all(np.isfinite(pmf)):
        raise NumericError("quantizer integration produced non-finite mass")
    total = pmf.sum()
    if abs(total - 1.0) > 1e-6:
        raise NumericError(f"quantizer mass {total} too far from 1")
    pmf = np.clip(pmf, 0.0, None) / total

    reps = _cell_means(x_std, x_edges)
    dist = (reps[:, None] - reps[None, :]) ** 2
    return DiscreteSourceSpec(
        joint_xy=pmf,
        v_given_x=np.eye(levels),
        u_given_v=np.ones((levels, 1)),
        distortion=dist,
        x_values=tuple(reps),
        xhat_values=tuple(reps),
    )


# -- bundled desk-scale example --------------------------------------------

def binary_symmetric_spec(num_users: int = 2, y_flip: float = 0.08,
                          v_flip: float = 0.25,
                          u_equals_v: bool = True) -> DiscreteSourceSpec:
    """Uniform-bit source observed through independent symmetric channels.

    Each user sees the source bit flipped with probability ``y_flip``; the
    helper description ``V`` is the source flipped with probability
    ``v_flip``.  With ``u_equals_v`` the coarse layer carries the whole
    description (the operating point suited to strong collusion);
    otherwise the coarse layer is constant.  Hamming distortion.
    """
    for p in (y_flip, v_flip):
        if not 0 <= p <= 0.5:
            raise InvalidParameterError("flip probabilities must be in [0, 0.5]")
    bsc_y = np.array([[1 - y_flip, y_flip], [y_flip, 1 - y_flip]])
    joint = np.full((2,), 0.5)
    for _ in range(num_users):
        # append one user axis; the channel depends on the X axis only
        lifted = bsc_y.reshape((2,) + (1,) * (joint.ndim - 1) + (2,))
        joint = joint[..., None] * lifted
    v_given_x = np.array([[1 - v_flip, v_flip], [v_flip, 1 - v_flip]])
    u_given_v = np.eye(2) if u_equals_v else np.ones((2, 1))
    return DiscreteSourceSpec(
        joint_xy=joint,
        v_given_x=v_given_x,
        u_given_v=u_given_v,
        distortion=1.0 - np.eye(2),
    )
