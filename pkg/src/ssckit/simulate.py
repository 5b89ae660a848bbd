"""Layered random-binning codec simulator for discrete sources.

The scheme builds two codebook layers.  A coarse codebook of rows drawn
iid from the marginal of U is organized into ``2^{n R_coarse}`` bins of
``2^{n R'_coarse}`` rows each; for every coarse row, a refinement
codebook drawn from ``P(V | U)`` around it is organized the same way with
rates ``(R_fine, R'_fine)``.  The encoder walks the codebooks in index
order and picks the first coarse row jointly typical with the source
block, then the first refinement row of that coarse row jointly typical
with (source, coarse row); only the two bin indices are stored publicly.
Authorized decoders search their bins for the unique in-bin pair that is
jointly typical with their observations and then apply a symbolwise
reconstruction table.

Strong typicality is multiplicative: a tuple of sequences is
``eps``-typical for a joint pmf when every joint-symbol count lies within
``n * p * (1 ± eps)``, which in particular forbids symbols of zero
probability.

Desk-scale caveat: at block lengths around 10-15 the asymptotic rates are
far out of reach, so the bundled demonstration configuration uses wide
typicality windows and disables binning (bins of one candidate decode by
direct lookup).  Those choices, and the finite-length slack the tests
allow, are documented in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .access import AccessStructure
from .discrete import (
    DiscreteRegionBounds,
    DiscreteSourceSpec,
    entropy_bits,
    marginal,
    rate_region_discrete,
)
from .errors import InvalidParameterError, ResourceLimitError

# Total index bits ceil'd across the four indices; keeps codebooks desk-scale.
MAX_INDEX_BITS = 24
# Exact leakage enumerates the whole source block space.
MAX_LEAKAGE_STATES = 1 << 20
# Comparisons of integer counts against n*p*(1 +/- eps) boundaries.
COUNT_SLACK = 1e-9


@dataclass(frozen=True)
class Epsilons:
    """Typicality radii: source block < encoder search < decoder search."""

    source: float = 0.05
    encode: float = 0.10
    decode: float = 0.20

    def __post_init__(self):
        if not 0 < self.source < self.encode < self.decode:
            raise InvalidParameterError(
                "epsilons must satisfy 0 < source < encode < decode"
            )


# Wide windows that keep block length ~12 workable; see module docstring.
DESK_EPSILONS = Epsilons(source=1.2, encode=2.4, decode=2.8)


@dataclass(frozen=True)
class Rates:
    """Per-symbol rates of the four indices (bits).

    ``coarse``/``fine`` are the publicly stored bin indices of the two
    layers; ``coarse_bin``/``fine_bin`` are the in-bin indices recovered
    from side information.
    """

    coarse: float
    coarse_bin: float
    fine: float
    fine_bin: float

    def __post_init__(self):
        if any(r < 0 for r in (self.coarse, self.coarse_bin,
                               self.fine, self.fine_bin)):
            raise InvalidParameterError("rates must be nonnegative")

    @property
    def total(self) -> float:
        return self.coarse + self.coarse_bin + self.fine + self.fine_bin

    @property
    def stored(self) -> float:
        return self.coarse + self.fine

    def sizes(self, n: int) -> tuple[int, int, int, int]:
        """Index-space sizes ``ceil(2^{n r})`` for each of the four rates."""
        return tuple(int(math.ceil(2.0 ** (n * r) - 1e-9))
                     for r in (self.coarse, self.coarse_bin,
                               self.fine, self.fine_bin))

    def to_dict(self) -> dict:
        return {"coarse": self.coarse, "coarse_bin": self.coarse_bin,
                "fine": self.fine, "fine_bin": self.fine_bin}


class Message(NamedTuple):
    coarse: int
    coarse_bin: int
    fine: int
    fine_bin: int

    @property
    def public(self) -> tuple[int, int]:
        return (self.coarse, self.fine)


def typical(seqs, pmf: np.ndarray, eps: float) -> bool:
    """Multiplicative strong typicality of a tuple of aligned sequences."""
    seqs = [np.asarray(s) for s in seqs]
    pmf = np.asarray(pmf, dtype=float)
    if pmf.ndim != len(seqs):
        raise InvalidParameterError("pmf rank must match the number of sequences")
    n = len(seqs[0])
    flat = np.ravel_multi_index(seqs, pmf.shape)
    counts = np.bincount(flat, minlength=pmf.size)
    p = pmf.reshape(-1)
    lower = n * p * (1.0 - eps) - COUNT_SLACK
    upper = n * p * (1.0 + eps) + COUNT_SLACK
    return bool(np.all(counts >= lower) and np.all(counts <= upper))


class CodebookPair:
    """Frozen two-layer codebooks plus the pmfs the codec tests against."""

    def __init__(self, spec: DiscreteSourceSpec, n: int, rates: Rates,
                 epsilons: Epsilons, seed: int):
        if n < 1:
            raise InvalidParameterError("block length must be positive")
        if n * rates.total > MAX_INDEX_BITS + 1e-9:
            raise ResourceLimitError(
                f"{n * rates.total:.2f} total index bits exceed {MAX_INDEX_BITS}"
            )
        self.spec = spec
        self.n = int(n)
        self.rates = rates
        self.epsilons = epsilons
        self.seed = int(seed)
        self.num_coarse, self.num_coarse_bin, self.num_fine, self.num_fine_bin = \
            rates.sizes(n)

        joint = spec.full_joint()
        ax, av, au = spec.axis_x(), spec.axis_v(), spec.axis_u()
        self.pmf_ux = marginal(joint, (au, ax))
        self.pmf_uvx = marginal(joint, (au, av, ax))
        self._joint = joint
        self._decode_pmfs: dict[frozenset, np.ndarray] = {}

        p_u = marginal(joint, (au,))
        p_vu = marginal(joint, (av, au))
        with np.errstate(divide="ignore", invalid="ignore"):
            v_given_u = np.where(p_u[None, :] > 0, p_vu / p_u[None, :],
                                 1.0 / spec.v_size).T
        rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        rows = self.num_coarse * self.num_coarse_bin
        cols = self.num_fine * self.num_fine_bin
        self.u_codebook = rng.choice(spec.u_size, size=(rows, self.n), p=p_u)
        cdf = np.cumsum(v_given_u, axis=1)
        self.v_codebook = np.empty((rows, cols, self.n), dtype=np.int64)
        for r in range(rows):
            row_cdf = cdf[self.u_codebook[r]]              # (n, |V|)
            unif = rng.random((cols, self.n))
            self.v_codebook[r] = (unif[:, :, None] > row_cdf[None, :, :]).sum(-1)
        self._encoder_map: np.ndarray | None = None

    # -- helpers ---------------------------------------------------------

    def decode_pmf(self, members: frozenset[int]) -> np.ndarray:
        if members not in self._decode_pmfs:
            axes = ((self.spec.axis_u(), self.spec.axis_v())
                    + self.spec.axes_y(members))
            self._decode_pmfs[members] = marginal(self._joint, axes)
        return self._decode_pmfs[members]

    @property
    def fail_key(self) -> int:
        """Stored-message key reserved for encoder failure (erasure)."""
        return self.num_coarse * self.num_fine

    def message_key(self, message: Message | None) -> int:
        if message is None:
            return self.fail_key
        return message.coarse * self.num_fine + message.fine

    def encoder_map(self) -> np.ndarray:
        """Stored-message key for every source block, built once.

        Entry ``k`` is the key of the block whose symbols are the base-|X|
        digits of ``k`` (most significant first).  Blocks the encoder
        cannot cover map to the erasure key.
        """
        if self._encoder_map is None:
            states = self.spec.x_size ** self.n
            if states > MAX_LEAKAGE_STATES:
                raise ResourceLimitError(
                    f"{states} source blocks exceed the enumeration cap"
                )
            blocks = enumerate_blocks(self.spec.x_size, self.n)
            keys = np.empty(states, dtype=np.int64)
            for k in range(states):
                keys[k] = self.message_key(encode(self, blocks[k]))
            self._encoder_map = keys
        return self._encoder_map


def enumerate_blocks(alphabet: int, n: int) -> np.ndarray:
    """All length-``n`` blocks over ``range(alphabet)``, most significant first."""
    states = alphabet ** n
    idx = np.arange(states)
    out = np.empty((states, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = idx % alphabet
        idx //= alphabet
    return out


def build_codebooks(spec: DiscreteSourceSpec, n: int, rates: Rates,
                    epsilons: Epsilons, seed: int) -> CodebookPair:
    return CodebookPair(spec, n, rates, epsilons, seed)


def encode(cb: CodebookPair, x_seq) -> Message | None:
    """First-index typicality encoding; None marks an encode failure."""
    x = np.asarray(x_seq)
    if x.shape != (cb.n,):
        raise InvalidParameterError(f"source block must have length {cb.n}")
    eps = cb.epsilons.encode
    for row in range(cb.u_codebook.shape[0]):
        if typical((cb.u_codebook[row], x), cb.pmf_ux, eps):
            for col in range(cb.v_codebook.shape[1]):
                if typical((cb.u_codebook[row], cb.v_codebook[row, col], x),
                           cb.pmf_uvx, eps):
                    m_p, m_pp = divmod(row, cb.num_coarse_bin)
                    m_s, m_sp = divmod(col, cb.num_fine_bin)
                    return Message(m_p, m_pp, m_s, m_sp)
            return None
    return None


def decode(cb: CodebookPair, m_coarse: int, m_fine: int, y_seqs,
           members) -> np.ndarray | None:
    """Recover the reconstruction block for one authorized set.

    ``y_seqs`` holds the observation sequences of ``sorted(members)`` in
    that order.  With more than one candidate per stored message the
    decoder requires a unique jointly typical in-bin pair and reports a
    decode error otherwise; with singleton bins there is nothing to
    disambiguate and the pair is read off directly.
    """
    members = frozenset(int(m) for m in members)
    if not 0 <= m_coarse < cb.num_coarse or not 0 <= m_fine < cb.num_fine:
        raise InvalidParameterError("message indices out of range")
    ys = [np.asarray(y) for y in y_seqs]
    if len(ys) != len(members):
        raise InvalidParameterError("one observation sequence per member required")
    candidates = []
    if cb.num_coarse_bin * cb.num_fine_bin == 1:
        candidates.append((m_coarse * cb.num_coarse_bin,
                           m_fine * cb.num_fine_bin))
    else:
        pmf = cb.decode_pmf(members)
        eps = cb.epsilons.decode
        for jp in range(cb.num_coarse_bin):
            row = m_coarse * cb.num_coarse_bin + jp
            for js in range(cb.num_fine_bin):
                col = m_fine * cb.num_fine_bin + js
                seqs = (cb.u_codebook[row], cb.v_codebook[row, col], *ys)
                if typical(seqs, pmf, eps):
                    candidates.append((row, col))
        if len(candidates) != 1:
            return None
    row, col = candidates[0]
    table = cb.spec.reconstruction_for(members)
    v = cb.v_codebook[row, col]
    return table[(v,) + tuple(ys)]


def rates_with_margin(spec: DiscreteSourceSpec, structure: AccessStructure,
                      margin: float = 0.10,
                      bin_fraction: float = 1.0) -> Rates:
    """Rates a fixed margin inside every layer threshold.

    Codeword-rate floors are exceeded by ``margin``; bin capacities stay
    at least ``margin`` inside their ceilings, scaled by ``bin_fraction``
    (0 disables binning entirely, trading storage rate for decoder
    simplicity, which is the honest choice at desk-scale block lengths).
    """
    if not 0 <= bin_fraction <= 1:
        raise InvalidParameterError("bin_fraction must lie in [0, 1]")
    if not 0 <= margin < 1:
        raise InvalidParameterError("margin must lie in [0, 1)")
    b = rate_region_discrete(spec, structure)
    total_coarse = (1 + margin) * b.i_u_x
    total_fine = (1 + margin) * b.i_v_x_given_u
    fine_bin = bin_fraction * min((1 - margin) * b.min_i_v_ya_given_u, total_fine)
    coarse_bin = bin_fraction * min(
        max(0.0, (1 - margin) * b.min_i_v_ya - fine_bin), total_coarse)
    return Rates(coarse=total_coarse - coarse_bin, coarse_bin=coarse_bin,
                 fine=total_fine - fine_bin, fine_bin=fine_bin)


class LeakageEstimate(NamedTuple):
    bits_per_symbol: float
    stderr: float


def leakage_exact(spec: DiscreteSourceSpec, cb: CodebookPair, members,
                  samples: int, seed: int,
                  encoder_map: np.ndarray | None = None) -> LeakageEstimate:
    """Exact-posterior estimate of the per-symbol information leakage.

    Evaluates ``H(X) - (1/n) E[-log2 P(x^n | m, y_B^n)]`` where the inner
    probability is computed exactly by summing the prior times the
    observation likelihood over every source block mapping to the same
    stored message.  The expectation over ``(x^n, y_B^n)`` is replaced by
    a seeded sample average (whose standard error is returned); nothing
    else is approximated, so small-sample plug-in bias is avoided.

    ``members`` may be empty: the estimate is then the per-symbol
    information carried by the stored message alone.
    """
    if samples < 1:
        raise InvalidParameterError("samples must be positive")
    members = frozenset(int(m) for m in members)
    n = cb.n
    states = spec.x_size ** n
    if states > MAX_LEAKAGE_STATES:
        raise ResourceLimitError(f"{states} source blocks exceed the enumeration cap")
    keys = cb.encoder_map() if encoder_map is None else np.asarray(encoder_map)
    if keys.shape != (states,):
        raise InvalidParameterError("encoder map must cover every source block")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    blocks = enumerate_blocks(spec.x_size, n)
    p_x = marginal(spec.full_joint(), (spec.axis_x(),))
    with np.errstate(divide="ignore"):
        log_px = np.log(p_x)
    log_prior = log_px[blocks].sum(axis=1)              # (states,)

    x_samples = rng.choice(spec.x_size, size=(samples, n), p=p_x)
    if members:
        y_axes = spec.axes_y(members)
        joint_xy = marginal(spec.full_joint(), (spec.axis_x(),) + y_axes)
        cond = joint_xy.reshape(spec.x_size, -1)
        cond = cond / cond.sum(axis=1, keepdims=True)
        cdf = np.cumsum(cond, axis=1)
        unif = rng.random((samples, n))
        y_flat = (unif[:, :, None] > cdf[x_samples]).sum(axis=-1)
        with np.errstate(divide="ignore"):
            log_cond = np.log(cond)
    else:
        y_flat = None

    sample_state = np.zeros(samples, dtype=np.int64)
    for pos in range(n):
        sample_state = sample_state * spec.x_size + x_samples[:, pos]
    sample_keys = keys[sample_state]

    terms = np.empty(samples)
    chunk = max(1, int(2_000_000 // max(states, 1)))
    for start in range(0, samples, chunk):
        stop = min(start + chunk, samples)
        if members:
            ll = log_cond[blocks[None, :, :], y_flat[start:stop, None, :]].sum(-1)
        else:
            ll = np.zeros((stop - start, states))
        w = ll + log_prior[None, :]
        w = np.where(keys[None, :] == sample_keys[start:stop, None], w, -np.inf)
        w_max = w.max(axis=1, keepdims=True)
        log_z = w_max[:, 0] + np.log(np.exp(w - w_max).sum(axis=1))
        w_self = w[np.arange(stop - start), sample_state[start:stop]]
        terms[start:stop] = -(w_self - log_z) / math.log(2.0)

    h_x = entropy_bits(p_x)
    bits = h_x - terms.mean() / n
    stderr = float(terms.std(ddof=1) / math.sqrt(samples) / n) if samples > 1 else 0.0
    return LeakageEstimate(bits_per_symbol=float(bits), stderr=stderr)


@dataclass
class SimResult:
    """Outcome of an end-to-end simulation run."""

    n: int
    trials: int
    seed: int
    rates: Rates
    encode_failures: int
    decode_errors: dict
    mean_distortion: dict
    leakage: dict
    bounds: DiscreteRegionBounds
    target_distortion: float
    d_max: float
    leakage_samples: int = 0

    def to_dict(self) -> dict:
        def set_key(s):
            return ",".join(map(str, sorted(s))) if s else "empty"

        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "rates": self.rates.to_dict(),
            "encode_failures": self.encode_failures,
            "decode_errors": {set_key(k): v for k, v in self.decode_errors.items()},
            "mean_distortion": {set_key(k): v
                                for k, v in self.mean_distortion.items()},
            "leakage": {set_key(k): {"bits_per_symbol": v.bits_per_symbol,
                                     "stderr": v.stderr}
                        for k, v in self.leakage.items()},
            "bounds": self.bounds.to_dict(),
            "target_distortion": self.target_distortion,
            "d_max": self.d_max,
            "leakage_samples": self.leakage_samples,
        }


def simulate(spec: DiscreteSourceSpec, structure: AccessStructure,
             cb: CodebookPair, trials: int, seed: int,
             leakage_samples: int = 2000) -> SimResult:
    """Run encode/decode trials and exact leakage estimates.

    Distortion is averaged per minimal authorized set with the maximum
    distortion charged for any encode or decode failure; leakage is
    estimated per maximal unauthorized set.  Reproducible: all draws are
    derived from ``seed``.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be positive")
    if structure.num_users != spec.num_users:
        raise InvalidParameterError("structure and spec user counts disagree")
    ss = np.random.SeedSequence(seed)
    trial_seed, leak_seed = ss.spawn(2)
    rng = np.random.default_rng(trial_seed)

    joint_flat = spec.joint_xy.reshape(-1)
    shape = spec.joint_xy.shape
    draws = rng.choice(joint_flat.size, size=(trials, cb.n), p=joint_flat)
    symbols = np.stack(np.unravel_index(draws, shape), axis=0)
    # symbols[0] is X, symbols[l] is user l, each (trials, n)

    auth_sets = [frozenset(a) for a in structure.minimal_sets]
    unauth_sets = [frozenset(b) for b in structure.unauthorized_maximal_sets()]
    encode_failures = 0
    decode_errors = {a: 0 for a in auth_sets}
    dist_sums = {a: 0.0 for a in auth_sets}
    d_max = spec.d_max

    for trial in range(trials):
        x = symbols[0, trial]
        message = encode(cb, x)
        if message is None:
            encode_failures += 1
            for a in auth_sets:
                dist_sums[a] += d_max
            continue
        for a in auth_sets:
            ys = [symbols[m, trial] for m in sorted(a)]
            xhat = decode(cb, message.coarse, message.fine, ys, a)
            if xhat is None:
                decode_errors[a] += 1
                dist_sums[a] += d_max
            else:
                dist_sums[a] += float(spec.distortion[x, xhat].mean())

    leak_children = leak_seed.spawn(max(1, len(unauth_sets)))
    leakage = {}
    for b, child in zip(unauth_sets, leak_children):
        leakage[b] = leakage_exact(
            spec, cb, b, leakage_samples,
            int(np.random.default_rng(child).integers(2 ** 31)))

    return SimResult(
        n=cb.n,
        trials=trials,
        seed=seed,
        rates=cb.rates,
        encode_failures=encode_failures,
        decode_errors=decode_errors,
        mean_distortion={a: s / trials for a, s in dist_sums.items()},
        leakage=leakage,
        bounds=rate_region_discrete(spec, structure),
        target_distortion=spec.target_distortion(structure),
        d_max=d_max,
        leakage_samples=leakage_samples,
    )
