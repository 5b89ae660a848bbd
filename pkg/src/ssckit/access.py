"""Monotone access structures over a finite user set.

An access structure is a superset-closed family of subsets of ``{1..L}``:
the sets of users allowed to reconstruct the source.  It is stored by its
antichain of minimal authorized sets, which generates the family by
superset closure.  The complement family (the colluding sets whose
information gain must be bounded) is never materialized in full; only its
maximal elements are enumerated, which is sufficient because every
quantity optimized over it is monotone under set inclusion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidParameterError, ResourceLimitError, StructuralError

UserSubset = frozenset[int]

# Exhaustive minimal-transversal enumeration is only attempted below this
# many users; the regions themselves depend only on the antichain frontier.
MAX_ENUMERATION_USERS = 20


def validate_subset(num_users: int, members: Iterable[int]) -> UserSubset:
    """Check user indices are in ``1..num_users`` and return a frozenset."""
    s = frozenset(int(m) for m in members)
    for m in s:
        if not 1 <= m <= num_users:
            raise InvalidParameterError(
                f"user index {m} outside 1..{num_users}"
            )
    return s


@dataclass(frozen=True)
class AccessStructure:
    """Superset-closed family of authorized subsets of ``{1..num_users}``.

    ``minimal_sets`` must be an antichain of nonempty subsets; it is
    canonicalized (deduplicated and sorted) on construction.
    """

    num_users: int
    minimal_sets: tuple[UserSubset, ...]

    def __post_init__(self):
        if self.num_users < 1:
            raise InvalidParameterError("num_users must be >= 1")
        sets = {validate_subset(self.num_users, m) for m in self.minimal_sets}
        if not sets:
            raise StructuralError("at least one minimal authorized set is required")
        for s in sets:
            if not s:
                raise StructuralError("minimal authorized sets must be nonempty")
        # equal-size sets cannot nest, so only cross-size pairs need checking
        by_size: dict[int, list[UserSubset]] = {}
        for s in sets:
            by_size.setdefault(len(s), []).append(s)
        sizes = sorted(by_size)
        for small_size, big_size in itertools.combinations(sizes, 2):
            for small in by_size[small_size]:
                for big in by_size[big_size]:
                    if small < big:
                        raise StructuralError(
                            "minimal sets must form an antichain: "
                            f"{sorted(small)} < {sorted(big)}"
                        )
        canonical = tuple(sorted(sets, key=lambda s: (len(s), sorted(s))))
        object.__setattr__(self, "minimal_sets", canonical)

    def is_authorized(self, members: Iterable[int]) -> bool:
        """True iff some minimal authorized set is contained in ``members``."""
        s = validate_subset(self.num_users, members)
        return any(m <= s for m in self.minimal_sets)

    def unauthorized_maximal_sets(self) -> tuple[UserSubset, ...]:
        """Maximal subsets that are not authorized.

        A subset is unauthorized iff its complement hits every minimal
        authorized set, so the maximal unauthorized sets are exactly the
        complements of the minimal transversals of ``minimal_sets``.
        The empty set is returned when it is the only unauthorized set.
        """
        if self.num_users > MAX_ENUMERATION_USERS:
            raise ResourceLimitError(
                f"enumeration limited to {MAX_ENUMERATION_USERS} users"
            )
        full = frozenset(range(1, self.num_users + 1))
        transversals = _minimal_transversals(self.minimal_sets)
        complements = sorted((full - t for t in transversals),
                             key=lambda s: (len(s), sorted(s)))
        return tuple(complements)

    def to_dict(self) -> dict:
        return {
            "num_users": self.num_users,
            "minimal_sets": [sorted(s) for s in self.minimal_sets],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AccessStructure":
        """Build from ``{"num_users": L, "minimal_sets": [[...]]}`` or
        ``{"threshold": {"L": L, "t": t}}``."""
        if "threshold" in data:
            spec = data["threshold"]
            return threshold_structure(int(spec["L"]), int(spec["t"]))
        try:
            num_users = int(data["num_users"])
            minimal = data["minimal_sets"]
        except KeyError as exc:
            raise StructuralError(f"missing access-structure field: {exc}") from exc
        return cls(num_users, tuple(frozenset(m) for m in minimal))


def _minimal_transversals(sets: tuple[UserSubset, ...]) -> list[UserSubset]:
    """Berge-style enumeration of the minimal hitting sets of a family."""
    partial: list[UserSubset] = [frozenset()]
    for target in sets:
        grown: set[UserSubset] = set()
        for t in partial:
            if t & target:
                grown.add(t)
            else:
                for element in target:
                    grown.add(t | {element})
        partial = [t for t in grown if not any(o < t for o in grown)]
    return partial


def threshold_structure(num_users: int, t: int) -> AccessStructure:
    """Structure authorizing every subset of at least ``t`` users."""
    if not 1 <= t <= num_users:
        raise InvalidParameterError(
            f"threshold t={t} must satisfy 1 <= t <= {num_users}"
        )
    minimal = tuple(
        frozenset(c) for c in itertools.combinations(range(1, num_users + 1), t)
    )
    return AccessStructure(num_users, minimal)


def is_authorized(structure: AccessStructure, members: Iterable[int]) -> bool:
    return structure.is_authorized(members)


def unauthorized_maximal_sets(structure: AccessStructure) -> tuple[UserSubset, ...]:
    return structure.unauthorized_maximal_sets()


def optimal_sets(structure: AccessStructure, model) -> tuple[UserSubset, UserSubset]:
    """Pick the trace-optimal authorized and unauthorized subsets.

    Returns ``(a_star, b_star)`` where ``a_star`` minimizes the aggregate
    precision ``sum(1/noise_var)`` over authorized sets (attained on a
    minimal set, since adding a user strictly increases the sum) and
    ``b_star`` maximizes it over unauthorized sets (attained on a maximal
    one).  Ties break to the lexicographically smallest member list, which
    keeps outputs deterministic; the region value itself is tie-invariant.
    """
    if model.num_users != structure.num_users:
        raise InvalidParameterError(
            f"model has {model.num_users} users, structure has {structure.num_users}"
        )

    def lex_smallest(candidates):
        return min(candidates, key=lambda s: sorted(s))

    traces_a = {s: model.trace_inv(s) for s in structure.minimal_sets}
    a_star = lex_smallest(s for s, tr in traces_a.items() if tr == min(traces_a.values()))

    unauth = structure.unauthorized_maximal_sets()
    if not unauth:
        raise StructuralError("no unauthorized sets: leakage constraint is vacuous")
    traces_b = {s: model.trace_inv(s) for s in unauth}
    b_star = lex_smallest(s for s, tr in traces_b.items() if tr == max(traces_b.values()))
    return a_star, b_star
