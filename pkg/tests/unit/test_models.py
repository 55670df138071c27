"""Unit tests for Pydantic models."""

import json
import math

import pytest
from pydantic import ValidationError as PydanticValidationError

from pgcl_certify.cli.report import report_json, report_schema
from pgcl_certify.models.annotations import AnnotationFile, CheckSection
from pgcl_certify.models.certificates import (
    AstAssertion,
    Certificate,
    EvidenceKind,
    OracleSummary,
    RuleId,
    SideCondition,
    TransformerKind,
    Verdict,
    Witness,
)
from pgcl_certify.models.reports import Report
from tests.conftest import CORPUS_DIR

SCHEMA_PATH = CORPUS_DIR.parent / "schemas" / "report.schema.json"


def check_section(**overrides) -> dict:
    values = {
        "rule": "park-upper",
        "post": "b",
        "invariant": "b + [a != 0]",
        "domain": "a in {0, 1}; b in 0..5",
    }
    values.update(overrides)
    return values


class TestCheckSection:
    """Tests for the [check] table."""

    def test_minimal_park(self) -> None:
        check = CheckSection.model_validate(check_section())
        assert check.rule is RuleId.PARK_UPPER
        assert check.kind is TransformerKind.WP
        assert check.ast is AstAssertion.NONE
        assert check.truncation == {}

    def test_rule_requires_keys(self) -> None:
        with pytest.raises(PydanticValidationError) as exc_info:
            CheckSection.model_validate(check_section(rule="mciver-3", bound_on_f=1))
        assert "requires: epsilon" in str(exc_info.value)

    def test_ert_lower_requires_ert_kind(self) -> None:
        with pytest.raises(PydanticValidationError):
            CheckSection.model_validate(check_section(rule="ert-lower", cdb_bound=1))

    def test_wp_rule_rejects_ert_kind(self) -> None:
        with pytest.raises(PydanticValidationError):
            CheckSection.model_validate(check_section(rule="ost-c", bound_on_f=1, kind="ert"))

    def test_unknown_key_forbidden(self) -> None:
        with pytest.raises(PydanticValidationError):
            CheckSection.model_validate(check_section(invarient="b"))

    def test_bad_truncation(self) -> None:
        with pytest.raises(PydanticValidationError):
            CheckSection.model_validate(check_section(truncation={"x": [5, 0]}))

    def test_unknown_rule(self) -> None:
        with pytest.raises(PydanticValidationError):
            CheckSection.model_validate(check_section(rule="optional-stopping"))

    def test_expected_verdict(self) -> None:
        check = CheckSection.model_validate(check_section(expect="REJECTED"))
        assert check.expect is Verdict.REJECTED


class TestAnnotationFile:
    """Tests for the whole annotation document."""

    def test_defaults(self) -> None:
        file = AnnotationFile.model_validate({"program": {"path": "geo.pgcl"}, "check": check_section()})
        assert file.program.loop == 1
        assert file.constants == {}

    def test_loop_index_is_one_based(self) -> None:
        with pytest.raises(PydanticValidationError):
            AnnotationFile.model_validate(
                {"program": {"path": "geo.pgcl", "loop": 0}, "check": check_section()}
            )

    def test_extra_table_forbidden(self) -> None:
        with pytest.raises(PydanticValidationError):
            AnnotationFile.model_validate(
                {"program": {"path": "geo.pgcl"}, "check": check_section(), "checks": {}}
            )


class TestCertificateModels:
    """Tests for verdicts, assertions and certificates."""

    def test_exit_codes(self) -> None:
        assert Verdict.ACCEPTED.exit_code == 0
        assert Verdict.REJECTED.exit_code == 1
        assert Verdict.INCONCLUSIVE.exit_code == 2

    def test_assertion_strength(self) -> None:
        assert AstAssertion.LOOP_PAST.implies(AstAssertion.BODY_AST)
        assert AstAssertion.LOOP_AST.implies(AstAssertion.LOOP_AST)
        assert not AstAssertion.BODY_AST.implies(AstAssertion.LOOP_AST)

    def test_lower_bound_rules(self) -> None:
        assert not RuleId.PARK_UPPER.is_lower_bound
        assert all(rule.is_lower_bound for rule in RuleId if rule is not RuleId.PARK_UPPER)

    def test_witness_prefers_failed_condition(self) -> None:
        bad = Witness(state={"x": "1"}, lhs="2", rhs="1")
        cert = Certificate(
            rule=RuleId.OST_B,
            kind=TransformerKind.WP,
            verdict=Verdict.REJECTED,
            bound="x",
            post="x",
            invariant="x",
            domain="x in 0..3",
            domain_size=4,
            side_conditions=[
                SideCondition(name="subinvariance", passed=True, evidence=EvidenceKind.EXACT),
                SideCondition(name="cdb", passed=False, evidence=EvidenceKind.NUMERIC, witnesses=[bad]),
            ],
            oracle=OracleSummary(violations=[Witness(state={"x": "0"})]),
        )
        assert cert.witness == bad
        assert cert.failed_conditions == ["cdb"]
        assert cert.condition("subinvariance").passed
        assert cert.condition("harmonization") is None

    def test_oracle_passed(self) -> None:
        assert OracleSummary().passed
        assert not OracleSummary(violations=[Witness(state={})]).passed


class TestReport:
    """Tests for the JSON report."""

    def test_non_finite_numbers_become_null(self) -> None:
        report = Report(command="check", wall_clock_seconds=math.inf)
        data = json.loads(report_json(report))
        assert data["wall_clock_seconds"] is None
        assert data["schema_version"] == "1.0"

    def test_shipped_schema_matches_model(self) -> None:
        shipped = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
        generated = report_schema()
        assert set(shipped["$defs"]) == set(generated["$defs"])
        assert set(shipped["properties"]) == set(generated["properties"])
        for name, definition in generated["$defs"].items():
            if "properties" in definition:
                assert set(shipped["$defs"][name]["properties"]) == set(definition["properties"]), name
