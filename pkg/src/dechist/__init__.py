"""Numerical laboratory for decoherent histories.

Builds history class operators over finite-dimensional Hilbert spaces,
evaluates decoherence functionals, classifies history sets against the four
probability-assignment conditions (decoherence, partial decoherence,
consistency, linear positivity), and runs the forward/reverse Diósi
composition tests, the phase-robustness test, record-projector construction
and seeded witness searches.
"""

from .hilbert import (
    DEFAULT_ATOL,
    ProjectorFamily,
    Schedule,
    State,
    Unitary,
    ValidationError,
    family_from_basis,
    haar_random_unitary,
    heisenberg_projector,
    make_state_mixed,
    make_state_pure,
    maximally_mixed,
    max_abs,
    tensor,
    validate_projector_family,
)
from .histories import (
    ClassOperator,
    HistoryLabel,
    HistorySet,
    MemberPhasePerturbation,
    PhaseAmbiguityError,
    PhasePerturbation,
    chain_class_operator,
    coarse_grain,
    fine_grained_set,
    negation,
    phase_perturb,
)
from .conditions import (
    CONDITION_NAMES,
    DEFAULT_TOLERANCE,
    VENN_REGIONS,
    ConditionReport,
    DecoherenceFunctional,
    classify,
    decoherence_functional,
    interference_with_negation,
    quasi_probabilities,
)
from .diosi import (
    InternalFaultError,
    Scenario,
    TestVerdict,
    compose,
    forward_diosi_check,
    reverse_diosi_check,
    robustness_check,
)
from .records import RecordSet, construct_records
from .explorer import (
    RegionCatalog,
    SampleConfig,
    SuperprobResult,
    matched_pair_scenario,
    proportional_quasi_pair,
    random_matched_pair,
    sample_scenario,
    superprob_search,
    venn_search,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_ATOL",
    "DEFAULT_TOLERANCE",
    "CONDITION_NAMES",
    "VENN_REGIONS",
    "ValidationError",
    "InternalFaultError",
    "PhaseAmbiguityError",
    "State",
    "Unitary",
    "ProjectorFamily",
    "Schedule",
    "HistoryLabel",
    "ClassOperator",
    "HistorySet",
    "PhasePerturbation",
    "MemberPhasePerturbation",
    "DecoherenceFunctional",
    "ConditionReport",
    "Scenario",
    "TestVerdict",
    "RecordSet",
    "SampleConfig",
    "RegionCatalog",
    "SuperprobResult",
    "make_state_pure",
    "make_state_mixed",
    "maximally_mixed",
    "validate_projector_family",
    "family_from_basis",
    "heisenberg_projector",
    "tensor",
    "haar_random_unitary",
    "max_abs",
    "chain_class_operator",
    "fine_grained_set",
    "coarse_grain",
    "negation",
    "phase_perturb",
    "decoherence_functional",
    "quasi_probabilities",
    "interference_with_negation",
    "classify",
    "compose",
    "forward_diosi_check",
    "reverse_diosi_check",
    "robustness_check",
    "construct_records",
    "sample_scenario",
    "venn_search",
    "superprob_search",
    "matched_pair_scenario",
    "random_matched_pair",
    "proportional_quasi_pair",
]
