"""Secure source coding toolkit.

Closed-form rate-leakage trade-offs for a Gaussian source shared under a
monotone access structure, independent numerical oracles for every
identity used, and a desk-scale random-binning codec simulator for
discrete sources.
"""

__version__ = "0.1.0"

from .access import (
    AccessStructure,
    is_authorized,
    optimal_sets,
    threshold_structure,
    unauthorized_maximal_sets,
)
from .gaussian import (
    RawGaussianObservation,
    ScalarChannel,
    SourceModel,
    cond_var_given_side_info,
    cond_var_given_v_and_y,
    f_of_d,
    mutual_info_x_yb,
    normalize,
    sufficient_statistic,
)
from .region import (
    RatePoint,
    RegionResult,
    compute_region,
    contains,
    delta_min_recheck,
    region_from_traces,
    sweep_tradeoff,
)
from .threshold import (
    ThresholdReport,
    nested_optimal_sets,
    inclusion_verdicts,
    leakage_order_verdicts,
    threshold_report,
    threshold_table,
)
from .oracle import (
    CheckReport,
    fisher_identity_checks,
    helper_variance_equivalence_check,
    monte_carlo_mmse,
    run_verification,
    vector_conditioning_oracle,
)
from .discrete import (
    DiscreteSourceSpec,
    binary_symmetric_spec,
    quantize_gaussian,
    quantized_mutual_information,
    rate_region_discrete,
)
from .simulate import (
    CodebookPair,
    Epsilons,
    Rates,
    SimResult,
    build_codebooks,
    decode,
    encode,
    leakage_exact,
    rates_with_margin,
    simulate,
    typical,
)

__all__ = [name for name in dir() if not name.startswith("_")]
