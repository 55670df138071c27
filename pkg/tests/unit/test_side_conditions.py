"""Tests for the individual side conditions of the proof rules."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import pytest

from pgcl_certify.certificates.annotation import AnnotationSet
from pgcl_certify.certificates.side_conditions import (
    check_cdb,
    check_harmonization,
    check_invariant,
    delta,
    sample_states,
)
from pgcl_certify.cli.annotations import load_annotation
from pgcl_certify.core.exceptions import DomainError
from pgcl_certify.models.certificates import Direction, Ordering, TransformerKind
from pgcl_certify.syntax.domain import State
from pgcl_certify.syntax.parser import parse_domain, parse_expectation
from tests.conftest import CORPUS_DIR

WP = TransformerKind.WP
ERT = TransformerKind.ERT


def annotation(name: str) -> AnnotationSet:
    return load_annotation(CORPUS_DIR / name).annotation_set


def with_invariant(ann: AnnotationSet, text: str) -> AnnotationSet:
    return replace(ann, invariant=parse_expectation(text))


class TestInvariance:
    """``I`` against one application of the characteristic function."""

    def test_superinvariant(self, check_config) -> None:
        result = check_invariant(Direction.SUPER, WP, annotation("geo_park.toml"), cfg=check_config)
        assert result.holds_leq
        assert result.verdict is Ordering.EQ

    def test_not_superinvariant(self, check_config) -> None:
        ann = with_invariant(annotation("geo_park.toml"), "b")
        result = check_invariant(Direction.SUPER, WP, ann, cfg=check_config)
        assert not result.holds_leq
        # Phi(b) = b + 1/2 on every guard-true state
        assert result.leq_violation_count == 51
        assert result.max_violation == "1/2"

    def test_subinvariant_counterexample(self, check_config) -> None:
        result = check_invariant(
            Direction.SUB, WP, annotation("cex_counterexample.toml"), cfg=check_config
        )
        assert result.holds_leq

    def test_runtime_superinvariant(self, check_config) -> None:
        result = check_invariant(Direction.SUPER, ERT, annotation("geo_ert_park.toml"), cfg=check_config)
        assert result.verdict is Ordering.EQ

    def test_runtime_subinvariant_nested_loop(self, check_config) -> None:
        result = check_invariant(Direction.SUB, ERT, annotation("coupon_ert.toml"), cfg=check_config)
        assert result.holds_leq

    def test_nonconstant_probability(self, check_config) -> None:
        result = check_invariant(Direction.SUB, WP, annotation("filneg_ostb.toml"), cfg=check_config)
        assert result.holds_leq


class TestHarmonization:
    """``I`` equals ``f`` outside the guard."""

    def test_harmonized(self) -> None:
        assert check_harmonization(annotation("cex_ostb.toml")) == (True, None)

    def test_not_harmonized(self) -> None:
        passed, witness = check_harmonization(with_invariant(annotation("geo_park.toml"), "b + 1"))
        assert not passed
        assert witness.state["a"] == "0"
        assert witness.lhs == str(int(witness.state["b"]) + 1)


class TestConditionalDifferenceBoundedness:
    """Expected one-step change of the invariant."""

    def test_delta_values(self) -> None:
        ann = annotation("cex_ostb.toml")
        assert delta(ann.invariant, ann.loop, State(a=1, b=0, k=0)) == 1
        assert delta(ann.invariant, ann.loop, State(a=0, b=3, k=0)) == 0

    def test_delta_grows_with_counter(self) -> None:
        ann = annotation("cex_counterexample.toml")
        assert delta(ann.invariant, ann.loop, State(a=1, b=0, k=10)) == 1025

    def test_bounded(self) -> None:
        report = check_cdb(annotation("cex_ostb.toml"))
        assert report.passed is True
        assert report.max_delta == "1"
        assert report.states_checked == 242

    def test_unbounded(self) -> None:
        report = check_cdb(annotation("cex_counterexample.toml"))
        assert report.passed is False
        assert report.max_delta == "1025"
        assert report.argmax == {"a": "1", "b": "0", "k": "10"}
        assert report.claimed_bound == "1024"

    def test_no_claimed_bound(self) -> None:
        report = check_cdb(replace(annotation("cex_ostb.toml"), cdb_bound=None))
        assert report.passed is None
        assert report.max_delta == "1"

    def test_nonconstant_updates(self) -> None:
        ann = annotation("negncu_ostb.toml")
        # the decrement branch moves x - 1 from the x-part of I into y
        assert delta(ann.invariant, ann.loop, State(x=1, y=0)) == 0
        assert check_cdb(ann).passed is True


class TestDomainHandling:
    """Annotation domains and state sampling."""

    def test_sample_states_spread(self) -> None:
        domain = parse_domain("x in 0..9")
        picked = sample_states(domain, 4)
        assert picked[0] == State(x=0)
        assert picked[-1] == State(x=9)
        assert len(picked) == 4

    def test_sample_states_small_domain(self) -> None:
        domain = parse_domain("x in 0..2")
        assert sample_states(domain, 10) == list(domain.states())

    def test_domain_must_cover_variables(self) -> None:
        ann = annotation("cex_ostb.toml")
        with pytest.raises(DomainError):
            replace(ann, domain=parse_domain("a in {0, 1}; b in 0..3"))

    def test_truncation_names_program_variable(self) -> None:
        ann = annotation("rdw_mciver3.toml")
        with pytest.raises(DomainError):
            replace(ann, truncation={"z": (Fraction(0), Fraction(5))})
