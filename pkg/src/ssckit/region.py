"""Rate-leakage trade-off region for secure lossy coding of a Gaussian source.

For a model with source variance ``sigma_x2``, target mean-square
distortion ``d``, trace-optimal authorized precision ``tr_a`` and
trace-optimal unauthorized precision ``tr_b``, the achievable pairs
``(R, Delta)`` form the closed up-set above a corner point:

    R     >= [ (1/2) log2(sigma_x2 / d) - (1/2) log2(1 + sigma_x2 tr_a) ]+
    Delta >= g1  when tr_a >= tr_b   (authorized side better informed)
    Delta >= g2  when tr_a <= tr_b   (unauthorized side better informed)

with

    g1 = [ (1/2) log2(sigma_x2/d) - (1/2) log2(1 + sigma_x2 tr_a) ]+
         + (1/2) log2(1 + sigma_x2 tr_b)
    g2 = (1/2) log2( [ sigma_x2/d - (1 + sigma_x2 tr_a) ]+ + 1 + sigma_x2 tr_b ).

The two formulas coincide at ``tr_a == tr_b``; this is asserted at runtime
as a self-check.  When ``tr_a >= 1/d - 1/sigma_x2`` the side information
alone already meets the distortion target, the rate floor is zero, and
the leakage floor degenerates to what the strongest unauthorized set
learns on its own.

An independent re-evaluation path (:func:`delta_min_recheck`) recomposes
the leakage floor from conditional variances instead of traces, providing
a same-precision cross-check that the tests and acceptance suite enforce
at 1e-12.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .access import AccessStructure, optimal_sets
from .errors import InvalidParameterError, NumericError
from .gaussian import SourceModel

CASE_G1 = "G1"
CASE_G2 = "G2"
CASE_DEGENERATE = "DEGENERATE"

# |g1 - g2| at the case boundary beyond which the self-check aborts.
CASE_AGREEMENT_TOL = 1e-9


@dataclass(frozen=True)
class RatePoint:
    """A candidate (storage rate, leakage rate) pair, both in bits."""

    r: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.delta)):
            raise InvalidParameterError("rate point must be finite")
        if self.r < 0 or self.delta < 0:
            raise InvalidParameterError("rates must be nonnegative")


@dataclass(frozen=True)
class RegionResult:
    """Corner of the rate-leakage region plus the data that produced it."""

    r_min: float
    delta_min: float
    case_tag: str
    a_star: tuple[int, ...]
    b_star: tuple[int, ...]
    tr_a: float
    tr_b: float
    corner_c1: tuple[float, float]
    corner_c2: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "r_min": self.r_min,
            "delta_min": self.delta_min,
            "case_tag": self.case_tag,
            "a_star": list(self.a_star),
            "b_star": list(self.b_star),
            "tr_a": self.tr_a,
            "tr_b": self.tr_b,
            "corner_c1": list(self.corner_c1),
            "corner_c2": list(self.corner_c2),
        }


def rate_floor(sigma_x2: float, d: float, tr_a: float) -> float:
    """Minimum storage rate in bits per source symbol."""
    return max(0.0, 0.5 * math.log2(sigma_x2 / d)
               - 0.5 * math.log2(1.0 + sigma_x2 * tr_a))


def g1(sigma_x2: float, d: float, tr_a: float, tr_b: float) -> float:
    """Leakage floor when the authorized side is better informed."""
    return rate_floor(sigma_x2, d, tr_a) + 0.5 * math.log2(1.0 + sigma_x2 * tr_b)


def g2(sigma_x2: float, d: float, tr_a: float, tr_b: float) -> float:
    """Leakage floor when the unauthorized side is better informed.

    The clipped term inside the log already encodes the unconditional
    floor ``(1/2) log2(1 + sigma_x2 tr_b)``.
    """
    bracket = max(0.0, sigma_x2 / d - (1.0 + sigma_x2 * tr_a))
    return 0.5 * math.log2(bracket + 1.0 + sigma_x2 * tr_b)


def is_degenerate(sigma_x2: float, d: float, tr_a: float) -> bool:
    """True when side information alone meets the distortion target."""
    return tr_a >= 1.0 / d - 1.0 / sigma_x2


def region_from_traces(sigma_x2: float, d: float, tr_a: float, tr_b: float):
    """Evaluate the region corner from the two optimal traces.

    Returns ``(r_min, delta_min, case_tag)``.  ``tr_b`` may be zero (the
    only unauthorized set is empty), in which case the unaided-information
    term vanishes.
    """
    if not d > 0:
        raise InvalidParameterError("distortion must be positive")
    if not sigma_x2 > 0:
        raise InvalidParameterError("sigma_x2 must be positive")
    if tr_a < 0 or tr_b < 0:
        raise InvalidParameterError("traces must be nonnegative")
    if is_degenerate(sigma_x2, d, tr_a):
        return 0.0, 0.5 * math.log2(1.0 + sigma_x2 * tr_b), CASE_DEGENERATE
    r_min = rate_floor(sigma_x2, d, tr_a)
    if tr_a == tr_b:
        v1 = g1(sigma_x2, d, tr_a, tr_b)
        v2 = g2(sigma_x2, d, tr_a, tr_b)
        if abs(v1 - v2) > CASE_AGREEMENT_TOL:
            raise NumericError(
                f"case formulas disagree at the boundary: {v1} vs {v2}"
            )
        return r_min, v1, CASE_G1
    if tr_a > tr_b:
        return r_min, g1(sigma_x2, d, tr_a, tr_b), CASE_G1
    return r_min, g2(sigma_x2, d, tr_a, tr_b), CASE_G2


def delta_min_recheck(sigma_x2: float, d: float, tr_a: float, tr_b: float) -> float:
    """Independent recomposition of the leakage floor.

    Rebuilds the same quantity from residual variances,
    ``var_a = sigma_x2 / (tr_a sigma_x2 + 1)`` and likewise ``var_b``:
    the rate term becomes ``(1/2) log2(var_a / d)`` and the unaided
    information term ``(1/2) log2(sigma_x2 / var_b)``.  Used as a
    separate code path to cross-check ``region_from_traces``.
    """
    var_a = sigma_x2 / (tr_a * sigma_x2 + 1.0)
    var_b = sigma_x2 / (tr_b * sigma_x2 + 1.0)
    unaided = 0.5 * math.log2(sigma_x2 / var_b)
    if d >= var_a:
        return unaided
    if tr_a >= tr_b:
        return max(0.0, 0.5 * math.log2(var_a / d)) + unaided
    bracket = max(0.0, sigma_x2 / d - sigma_x2 / var_a)
    return 0.5 * math.log2(bracket + sigma_x2 / var_b)


def compute_region(model: SourceModel, structure: AccessStructure,
                   d: float) -> RegionResult:
    """Full region computation for a model and an access structure.

    Resolves the trace-optimal subsets, evaluates the corner, and reports
    the two corner points of the boundary sweep: C1 (no useful authorized
    side information, maximal rate) and C2 (zero rate).
    """
    if not d > 0:
        raise InvalidParameterError("distortion must be positive")
    a_star, b_star = optimal_sets(structure, model)
    tr_a = model.trace_inv(a_star)
    tr_b = model.trace_inv(b_star)
    r_min, delta_min, case_tag = region_from_traces(model.sigma_x2, d, tr_a, tr_b)
    r_full = 0.5 * math.log2(model.sigma_x2 / d)
    unaided = 0.5 * math.log2(1.0 + model.sigma_x2 * tr_b)
    return RegionResult(
        r_min=r_min,
        delta_min=delta_min,
        case_tag=case_tag,
        a_star=tuple(sorted(a_star)),
        b_star=tuple(sorted(b_star)),
        tr_a=tr_a,
        tr_b=tr_b,
        corner_c1=(r_full, r_full + unaided),
        corner_c2=(0.0, unaided),
    )


def contains(region: RegionResult, point: RatePoint) -> bool:
    """Closed-boundary membership test."""
    return point.r >= region.r_min and point.delta >= region.delta_min


def sweep_tradeoff(sigma_x2: float, d: float, tr_b: float,
                   tr_a_grid: Sequence[float], workers: int | None = None):
    """Boundary sweep over authorized precision at fixed ``tr_b``.

    Returns rows ``(tr_a, r_min, delta_min, case_tag)`` in grid order; the
    sweep passes through both case regimes and the kink at
    ``tr_a == tr_b``.  ``workers`` defaults to the SSC_THREADS environment
    variable (grid points are independent; order is restored by index).
    """
    grid = [float(t) for t in tr_a_grid]
    if any(t < 0 for t in grid):
        raise InvalidParameterError("grid traces must be nonnegative")

    def evaluate(tr_a):
        r_min, delta_min, tag = region_from_traces(sigma_x2, d, tr_a, tr_b)
        return tr_a, r_min, delta_min, tag

    if workers is None:
        workers = int(os.environ.get("SSC_THREADS", "1") or "1")
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate, grid))
    return [evaluate(t) for t in grid]
