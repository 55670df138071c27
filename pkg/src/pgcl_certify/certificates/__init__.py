"""Proof rules, their side conditions and the oracle cross-check."""

from pgcl_certify.certificates.annotation import (
    AnnotationSet,
    CheckConfig,
    build_annotation_set,
    parse_constants,
)
from pgcl_certify.certificates.side_conditions import (
    check_cdb,
    check_harmonization,
    check_invariant,
    delta,
)
from pgcl_certify.certificates.oracle import cross_check
from pgcl_certify.certificates.rules import (
    check_uniform_integrability_empirical,
    prove,
    prove_lower_ert,
    prove_lower_mciver,
    prove_lower_ost,
    prove_upper_park,
)

__all__ = [
    "AnnotationSet",
    "CheckConfig",
    "build_annotation_set",
    "parse_constants",
    "check_invariant",
    "check_harmonization",
    "check_cdb",
    "delta",
    "cross_check",
    "prove",
    "prove_upper_park",
    "prove_lower_ost",
    "prove_lower_mciver",
    "prove_lower_ert",
    "check_uniform_integrability_empirical",
]
