"""Tests for loading annotation files and binding them to programs."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from pgcl_certify.certificates.annotation import CheckConfig, parse_constant
from pgcl_certify.cli.annotations import load_annotation
from pgcl_certify.core.exceptions import AnnotationError, DomainError
from pgcl_certify.models.certificates import AstAssertion, RuleId, TransformerKind
from pgcl_certify.syntax.ast import Num, While
from pgcl_certify.syntax.printer import format_expr
from tests.conftest import CORPUS_DIR

GEO = """\
while (a != 0) {
    {a := 0} [1/2] {b := b + 1}
}
"""


def write_annotation(tmp_path: Path, body: str, program: str = GEO) -> Path:
    (tmp_path / "prog.pgcl").write_text(program, encoding="utf-8")
    path = tmp_path / "check.toml"
    path.write_text('[program]\npath = "prog.pgcl"\n\n' + body, encoding="utf-8")
    return path


PARK = """\
[check]
rule = "park-upper"
post = "b"
invariant = "b + [a != 0]"
domain = "a in {0, 1}; b in 0..5"
"""


class TestLoadAnnotation:
    """Reading TOML annotations."""

    def test_corpus_file(self) -> None:
        loaded = load_annotation(CORPUS_DIR / "cex_ostb.toml")
        ann = loaded.annotation_set
        assert loaded.program_path == (CORPUS_DIR / "cex.pgcl").resolve()
        assert ann.rule is RuleId.OST_B
        assert ann.kind is TransformerKind.WP
        assert ann.cdb_bound == 1
        assert ann.ast is AstAssertion.LOOP_PAST
        assert len(ann.domain) == 242
        assert loaded.raw["check"]["invariant"] == "b + [a != 0]"

    def test_program_relative_to_annotation(self, tmp_path: Path) -> None:
        loaded = load_annotation(write_annotation(tmp_path, PARK))
        assert isinstance(loaded.annotation_set.loop, While)
        assert format_expr(loaded.annotation_set.invariant) == "b + [a != 0]"

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(AnnotationError) as exc_info:
            load_annotation(tmp_path / "nope.toml")
        assert "not found" in exc_info.value.message

    def test_missing_program(self, tmp_path: Path) -> None:
        path = tmp_path / "check.toml"
        path.write_text('[program]\npath = "missing.pgcl"\n\n' + PARK, encoding="utf-8")
        with pytest.raises(AnnotationError, match="Program file not found"):
            load_annotation(path)

    def test_invalid_toml(self, tmp_path: Path) -> None:
        path = write_annotation(tmp_path, "[check\nrule = ")
        with pytest.raises(AnnotationError, match="Invalid TOML"):
            load_annotation(path)

    def test_missing_rule_keys(self, tmp_path: Path) -> None:
        path = write_annotation(tmp_path, PARK.replace("park-upper", "ost-b"))
        with pytest.raises(AnnotationError) as exc_info:
            load_annotation(path)
        assert any("cdb_bound" in error for error in exc_info.value.details["errors"])

    def test_domain_must_cover_invariant(self, tmp_path: Path) -> None:
        path = write_annotation(tmp_path, PARK.replace("b + [a != 0]", "b + c"))
        with pytest.raises(DomainError):
            load_annotation(path)

    def test_loop_index_out_of_range(self, tmp_path: Path) -> None:
        (tmp_path / "prog.pgcl").write_text(GEO, encoding="utf-8")
        path = tmp_path / "check.toml"
        path.write_text('[program]\npath = "prog.pgcl"\nloop = 2\n\n' + PARK, encoding="utf-8")
        with pytest.raises(AnnotationError, match="top-level loop"):
            load_annotation(path)

    def test_program_without_loop(self, tmp_path: Path) -> None:
        path = write_annotation(tmp_path, PARK, program="b := b + 1")
        with pytest.raises(AnnotationError, match="no top-level while loop"):
            load_annotation(path)


class TestConstants:
    """Named constants bound into programs and expectations."""

    def test_constants_table(self) -> None:
        ann = load_annotation(CORPUS_DIR / "coupon_ert.toml").annotation_set
        assert "N" not in format_expr(ann.invariant)
        # x := N was bound as well
        assert ann.program.left.expr == Num(Fraction(3))

    def test_extra_constants_override(self) -> None:
        ann = load_annotation(CORPUS_DIR / "coupon_ert.toml", {"N": Fraction(4)}).annotation_set
        assert ann.program.left.expr == Num(Fraction(4))

    def test_parse_constant(self) -> None:
        assert parse_constant("7/2", "c") == Fraction(7, 2)
        assert parse_constant(3, "c") == 3
        assert parse_constant(0.25, "c") == Fraction(1, 4)

    def test_parse_constant_rejects_open_terms(self) -> None:
        with pytest.raises(AnnotationError):
            parse_constant("x + 1", "c")
        with pytest.raises(AnnotationError):
            parse_constant(float("inf"), "c")

    def test_constant_cannot_be_assigned(self, tmp_path: Path) -> None:
        path = write_annotation(tmp_path, PARK + '\n[constants]\nb = 1\n')
        with pytest.raises(AnnotationError):
            load_annotation(path)


class TestCheckConfig:
    """Per-check configuration assembled from settings and overrides."""

    def test_overrides(self, test_settings) -> None:
        cfg = CheckConfig.from_settings(test_settings, seed=11, evidence_samples=50, step_cap=99)
        assert cfg.simulation.seed == 11
        assert cfg.simulation.evidence_samples == 50
        assert cfg.simulation.step_cap == 99
        assert cfg.tol == test_settings.DEFAULT_TOL
