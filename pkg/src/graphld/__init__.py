"""graphld: typed random graphs, their empirical locality measures, and the
relative-entropy rates governing rare-event decay.

The package samples typed graphs conditioned on empirical type and link
measures, extracts empirical distributions in exact rational arithmetic,
evaluates and minimizes relative-entropy rate functions, and verifies
predicted exponential decay rates by exact enumeration and Monte Carlo at
desk scale.
"""

from .graphs import (
    TypedGraph,
    degree_distribution,
    empirical_link_measure,
    empirical_locality_measure,
    empirical_type_measure,
)
from .measures import (
    CountingMeasure,
    FiniteMeasure,
    ProbMeasure,
    TypeAlphabet,
    dirac,
    encode_measure,
    is_consistent,
    is_sub_consistent,
    link_marginal,
    marginal_pair,
    total_variation,
    type_marginal,
)
from .optimizer import (
    ConstraintSet,
    InfeasibleConstraintsError,
    Optimum,
    minimize_relative_entropy,
    rate_infimum_for_event,
    tilted_family,
)
from .oracle import (
    EnumerationGuardError,
    EnumerationReport,
    entropy_neighborhood,
    enumerate_support,
    exact_event_probability,
    lldp_exponent_gap,
    type_class_counts,
)
from .rate import (
    RateResult,
    ReferenceLaw,
    degree_rate,
    reference_pmf,
    relative_entropy,
    truncated_poisson,
    typed_rate,
)
from .sampler import (
    ConditionSpec,
    InadmissibleSpecError,
    admissible,
    binary_cross_spec,
    sample_conditional_graph,
    sample_erdos_renyi,
)

__version__ = "0.1.0"

__all__ = [
    "CountingMeasure", "FiniteMeasure", "ProbMeasure", "TypeAlphabet",
    "dirac", "encode_measure", "is_consistent", "is_sub_consistent",
    "link_marginal", "marginal_pair", "total_variation", "type_marginal",
    "TypedGraph", "degree_distribution", "empirical_link_measure",
    "empirical_locality_measure", "empirical_type_measure",
    "RateResult", "ReferenceLaw", "degree_rate", "reference_pmf",
    "relative_entropy", "truncated_poisson", "typed_rate",
    "ConditionSpec", "InadmissibleSpecError", "admissible",
    "binary_cross_spec", "sample_conditional_graph", "sample_erdos_renyi",
    "EnumerationGuardError", "EnumerationReport", "entropy_neighborhood",
    "enumerate_support", "exact_event_probability", "lldp_exponent_gap",
    "type_class_counts",
    "ConstraintSet", "InfeasibleConstraintsError", "Optimum",
    "minimize_relative_entropy", "rate_infimum_for_event", "tilted_family",
]
