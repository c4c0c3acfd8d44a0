"""
kopcheck Properties - semantic predicates and theorem checkers.
"""

from kopcheck.properties.predicates import (
    ActionAssignment,
    claim_did_chain,
    claim_did_local,
    consciousness_equivalence,
    earliest,
    has_perfect_recall,
    is_conscious,
    is_local,
    is_necessary_condition,
    is_ordered,
    is_simultaneous,
    is_stable,
    make_assignment,
    observation_one,
    recalls,
)
from kopcheck.properties.theorems import (
    CheckResult,
    TheoremTag,
    VerificationReport,
    check_ckop,
    check_kop,
    check_nkop,
    predicate_report,
)

__all__ = [
    "ActionAssignment",
    "CheckResult",
    "TheoremTag",
    "VerificationReport",
    "check_ckop",
    "check_kop",
    "check_nkop",
    "claim_did_chain",
    "claim_did_local",
    "consciousness_equivalence",
    "earliest",
    "has_perfect_recall",
    "is_conscious",
    "is_local",
    "is_necessary_condition",
    "is_ordered",
    "is_simultaneous",
    "is_stable",
    "make_assignment",
    "observation_one",
    "predicate_report",
    "recalls",
]
