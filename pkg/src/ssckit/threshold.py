"""Threshold-structure analytics: per-threshold regions and ordering verdicts.

For the structure that authorizes every set of at least ``t`` users, the
trace-optimal subsets nest as ``t`` grows once users are sorted by
decreasing noise variance: the best authorized set is the ``t`` noisiest
users (smallest aggregate precision) and the worst colluding set is the
``t - 1`` least noisy users.  On top of the per-``t`` regions this module
evaluates two families of closed-form ordering predicates and compares
each prediction against the directly computed region values:

* region inclusion of the ``t``-threshold region inside the unanimity
  region, equivalent to a ratio condition on shifted traces, and the
  unconditional monotone decrease of the rate floor in ``t``;
* the four-case classification of how the leakage floor moves with the
  threshold (comparisons of trace differences or shifted-trace ratios in
  the two uniform-case quadrants, forced orderings in the mixed ones).

Each verdict row records the predicted and observed boolean with a 1e-9
dead-band around equality on both sides; the predicates are exact
equivalences, so any robust disagreement is a bug in one of the paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidParameterError
from .gaussian import SourceModel
from .region import region_from_traces

DEAD_BAND = 1e-9


def _ge(a: float, b: float) -> bool:
    return a >= b - DEAD_BAND


def _le(a: float, b: float) -> bool:
    return a <= b + DEAD_BAND


def _near(a: float, b: float) -> bool:
    return abs(a - b) <= DEAD_BAND


@dataclass(frozen=True)
class ThresholdRow:
    t: int
    tr_a: float
    tr_b: float
    r_min: float
    delta_min: float
    case_tag: str
    a_star: tuple[int, ...]
    b_star: tuple[int, ...]


@dataclass(frozen=True)
class VerdictRow:
    t: int
    i: int
    predicate_id: str
    predicted: bool
    observed: bool
    applicable: bool = True
    # predicted == observed, with a let-out when either comparison sits
    # inside the dead-band (the two sides live on different scales).
    consistent: bool = True


@dataclass
class ThresholdReport:
    rows: list[ThresholdRow] = field(default_factory=list)
    verdicts: list[VerdictRow] = field(default_factory=list)

    ROW_HEADER = ("t", "tr_a", "tr_b", "r_min", "delta_min", "case_tag",
                  "a_star", "b_star")
    VERDICT_HEADER = ("t", "i", "predicate_id", "predicted", "observed",
                      "applicable", "consistent")

    def row_records(self):
        for r in self.rows:
            yield (r.t, r.tr_a, r.tr_b, r.r_min, r.delta_min, r.case_tag,
                   " ".join(map(str, r.a_star)), " ".join(map(str, r.b_star)))

    def verdict_records(self):
        for v in self.verdicts:
            yield (v.t, v.i, v.predicate_id, v.predicted, v.observed,
                   v.applicable, v.consistent)


def users_by_decreasing_variance(model: SourceModel) -> list[int]:
    """User indices ordered by nonincreasing noise variance, ties by index."""
    return sorted(range(1, model.num_users + 1),
                  key=lambda u: (-model.noise_vars[u - 1], u))


def nested_optimal_sets(model: SourceModel, t: int):
    """Trace-optimal subsets for threshold ``t`` as a nested family.

    Returns ``(a_star, b_star)`` with ``a_star`` the ``t`` noisiest users
    and ``b_star`` the ``t - 1`` least noisy ones.  For ``t == 1`` the
    only colluding set is empty and ``b_star`` is the empty frozenset
    (aggregate precision zero, unaided information zero).
    """
    if not 1 <= t <= model.num_users:
        raise InvalidParameterError(
            f"threshold t={t} must satisfy 1 <= t <= {model.num_users}"
        )
    order = users_by_decreasing_variance(model)
    a_star = frozenset(order[:t])
    b_star = frozenset(order[len(order) - (t - 1):]) if t > 1 else frozenset()
    return a_star, b_star


def _checked_t_range(model: SourceModel, t_range) -> list[int]:
    if t_range is None:
        return list(range(1, model.num_users + 1))
    ts = sorted(set(int(t) for t in t_range))
    for t in ts:
        if not 1 <= t <= model.num_users:
            raise InvalidParameterError(
                f"t={t} outside [1, {model.num_users}]"
            )
    return ts


def threshold_table(model: SourceModel, d: float, t_range=None) -> list[ThresholdRow]:
    """Region corner for each threshold in ``t_range`` (default all)."""
    rows = []
    for t in _checked_t_range(model, t_range):
        a_star, b_star = nested_optimal_sets(model, t)
        tr_a = model.trace_inv(a_star)
        tr_b = model.trace_inv(b_star)
        r_min, delta_min, tag = region_from_traces(model.sigma_x2, d, tr_a, tr_b)
        rows.append(ThresholdRow(t, tr_a, tr_b, r_min, delta_min, tag,
                                 tuple(sorted(a_star)), tuple(sorted(b_star))))
    return rows


def _hypothesis_holds(model: SourceModel, d: float, tr_a: float) -> bool:
    # The ordering predicates assume the source actually needs encoding.
    return tr_a < 1.0 / d - 1.0 / model.sigma_x2


def inclusion_verdicts(model: SourceModel, d: float, t_range=None) -> list[VerdictRow]:
    """Inclusion-in-unanimity and rate-monotonicity verdicts.

    For each threshold ``t``, the unanimity region contains the ``t``
    region iff the shifted-trace ratio at ``t`` does not exceed the one at
    ``L``; and the rate floor never increases with the threshold.  Rows
    whose hypotheses fail are flagged not applicable and not evaluated.
    """
    ts = _checked_t_range(model, t_range)
    big_l = model.num_users
    table = {r.t: r for r in threshold_table(model, d)}
    inv_sx2 = 1.0 / model.sigma_x2

    def ratio(row: ThresholdRow) -> float:
        return (inv_sx2 + row.tr_a) / (inv_sx2 + row.tr_b)

    verdicts = []
    row_l = table[big_l]
    hyp_l = _hypothesis_holds(model, d, row_l.tr_a)
    for t in ts:
        row_t = table[t]
        if t != big_l:
            if not (_hypothesis_holds(model, d, row_t.tr_a) and hyp_l):
                verdicts.append(VerdictRow(t, big_l - t, "region_inclusion_in_unanimity",
                                           False, False, applicable=False))
            else:
                predicted = _le(ratio(row_t), ratio(row_l))
                observed = (_le(row_l.r_min, row_t.r_min)
                            and _le(row_l.delta_min, row_t.delta_min))
                consistent = (predicted == observed
                              or _near(ratio(row_t), ratio(row_l))
                              or _near(row_l.delta_min, row_t.delta_min))
                verdicts.append(VerdictRow(t, big_l - t, "region_inclusion_in_unanimity",
                                           predicted, observed,
                                           consistent=consistent))
        for u in ts:
            if u <= t:
                continue
            row_u = table[u]
            if not (_hypothesis_holds(model, d, row_t.tr_a)
                    and _hypothesis_holds(model, d, row_u.tr_a)):
                verdicts.append(VerdictRow(t, u - t, "rate_floor_monotone",
                                           True, False, applicable=False))
                continue
            observed = _ge(row_t.r_min, row_u.r_min)
            verdicts.append(VerdictRow(t, u - t, "rate_floor_monotone",
                                       True, observed, consistent=observed))
    return verdicts


def leakage_order_verdicts(model: SourceModel, d: float, t_range=None) -> list[VerdictRow]:
    """Four-case leakage ordering verdicts for every admissible pair.

    Case quadrants are selected by comparing each threshold's authorized
    and unauthorized aggregate precisions; at an exact tie both adjacent
    cases are emitted (their predicates agree there).
    """
    ts = _checked_t_range(model, t_range)
    table = {r.t: r for r in threshold_table(model, d)}
    inv_sx2 = 1.0 / model.sigma_x2
    verdicts = []
    for t in ts:
        for u in ts:
            if u <= t:
                continue
            row_t, row_u = table[t], table[u]
            i = u - t
            if not (_hypothesis_holds(model, d, row_t.tr_a)
                    and _hypothesis_holds(model, d, row_u.tr_a)):
                verdicts.append(VerdictRow(t, i, "leakage_order", False, False,
                                           applicable=False))
                continue
            dt, du = row_t.delta_min, row_u.delta_min
            observed_ge = _ge(dt, du)
            observed_le = _le(dt, du)
            if _le(row_t.tr_a, row_t.tr_b) and _le(row_u.tr_a, row_u.tr_b):
                gap_a = row_u.tr_a - row_t.tr_a
                gap_b = row_u.tr_b - row_t.tr_b
                predicted = _ge(gap_a, gap_b)
                consistent = (predicted == observed_ge or _near(gap_a, gap_b)
                              or _near(dt, du))
                verdicts.append(VerdictRow(t, i, "leakage_case1_delta_ge",
                                           predicted, observed_ge,
                                           consistent=consistent))
            if _ge(row_t.tr_a, row_t.tr_b) and _ge(row_u.tr_a, row_u.tr_b):
                ratio_t = (inv_sx2 + row_t.tr_b) / (inv_sx2 + row_t.tr_a)
                ratio_u = (inv_sx2 + row_u.tr_b) / (inv_sx2 + row_u.tr_a)
                predicted = _ge(ratio_t, ratio_u)
                consistent = (predicted == observed_ge
                              or _near(ratio_t, ratio_u) or _near(dt, du))
                verdicts.append(VerdictRow(t, i, "leakage_case2_delta_ge",
                                           predicted, observed_ge,
                                           consistent=consistent))
            if _ge(row_t.tr_a, row_t.tr_b) and _le(row_u.tr_a, row_u.tr_b):
                verdicts.append(VerdictRow(t, i, "leakage_case3_delta_le",
                                           True, observed_le,
                                           consistent=observed_le))
            if _le(row_t.tr_a, row_t.tr_b) and _ge(row_u.tr_a, row_u.tr_b):
                verdicts.append(VerdictRow(t, i, "leakage_case4_delta_ge",
                                           True, observed_ge,
                                           consistent=observed_ge))
    return verdicts


def threshold_report(model: SourceModel, d: float, t_range=None) -> ThresholdReport:
    """Rows plus both verdict families in one report."""
    report = ThresholdReport(rows=threshold_table(model, d, t_range))
    report.verdicts = (inclusion_verdicts(model, d, t_range)
                       + leakage_order_verdicts(model, d, t_range))
    return report


def delta_sequence_is_monotone(rows: list[ThresholdRow]) -> bool:
    """True iff the leakage floors are monotone (either direction) in t."""
    deltas = [r.delta_min for r in sorted(rows, key=lambda r: r.t)]
    nondecreasing = all(b >= a - DEAD_BAND for a, b in zip(deltas, deltas[1:]))
    nonincreasing = all(b <= a + DEAD_BAND for a, b in zip(deltas, deltas[1:]))
    return nondecreasing or nonincreasing


def five_user_example_model() -> SourceModel:
    """Five-user worked example used across the documentation and tests."""
    return SourceModel(sigma_x2=2.0, noise_vars=(1.0, 0.8, 0.9, 0.7, 0.6))
