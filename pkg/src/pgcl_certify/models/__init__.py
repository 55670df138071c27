"""Pydantic models shared across the toolkit."""

from pgcl_certify.models.annotations import AnnotationFile, CheckSection, ProgramSection
from pgcl_certify.models.certificates import (
    AstAssertion,
    Caveat,
    CdbReport,
    Certificate,
    ComparisonResult,
    Direction,
    EvidenceKind,
    OracleSummary,
    Ordering,
    RuleId,
    SideCondition,
    TransformerKind,
    UiStateTrace,
    UniformIntegrabilityReport,
    Verdict,
    Witness,
)
from pgcl_certify.models.estimates import Estimate, LoopingTimeEstimate
from pgcl_certify.models.reports import SCHEMA_VERSION, Report

__all__ = [
    "AnnotationFile",
    "CheckSection",
    "ProgramSection",
    "AstAssertion",
    "Caveat",
    "CdbReport",
    "Certificate",
    "ComparisonResult",
    "Direction",
    "EvidenceKind",
    "OracleSummary",
    "Ordering",
    "RuleId",
    "SideCondition",
    "TransformerKind",
    "UiStateTrace",
    "UniformIntegrabilityReport",
    "Verdict",
    "Witness",
    "Estimate",
    "LoopingTimeEstimate",
    "Report",
    "SCHEMA_VERSION",
]
