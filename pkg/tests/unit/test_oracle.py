"""Tests for the fixed-point cross-check of certified bounds."""

from __future__ import annotations

import tomllib
from dataclasses import replace
from pathlib import Path

import pytest

from pgcl_certify.certificates.annotation import AnnotationSet
from pgcl_certify.certificates.oracle import cross_check
from pgcl_certify.certificates.rules import prove
from pgcl_certify.cli.annotations import load_annotation
from pgcl_certify.engine.algebra import evaluate, exceeds, is_inf
from pgcl_certify.engine.fixpoint import eval_transformer
from pgcl_certify.models.certificates import RuleId, TransformerKind, Verdict
from pgcl_certify.syntax.parser import parse_expectation
from tests.conftest import CORPUS_DIR

# rules whose certified bound is the annotated invariant itself
INVARIANT_BOUND_RULES = {
    RuleId.PARK_UPPER,
    RuleId.OST_A,
    RuleId.OST_B,
    RuleId.OST_C,
    RuleId.MCIVER_3,
    RuleId.MCIVER_GEN,
    RuleId.ERT_LOWER,
}


def annotation(name: str) -> AnnotationSet:
    return load_annotation(CORPUS_DIR / name).annotation_set


def accepted_annotations() -> list[Path]:
    paths = []
    for path in sorted(CORPUS_DIR.glob("*.toml")):
        check = tomllib.loads(path.read_text(encoding="utf-8"))["check"]
        if check["expect"] == "ACCEPTED" and RuleId(check["rule"]) in INVARIANT_BOUND_RULES:
            paths.append(path)
    return paths


def invariant_plus(ann: AnnotationSet, extra: str):
    bumped = parse_expectation(extra)
    return lambda state: evaluate(ann.invariant, state) + evaluate(bumped, state)


def tolerance(value) -> float:
    return 1e-6 if is_inf(value) else 1e-6 * max(1.0, abs(float(value)))


class TestCrossCheck:
    """Coverage and verdicts of the oracle."""

    def test_every_domain_state_checked(self, check_config) -> None:
        ann = annotation("cex_ostb.toml")
        summary = cross_check(ann, TransformerKind.WP, invariant_plus(ann, "0"), False, check_config)
        assert summary.checked_states == len(list(ann.domain.states())) == 242
        assert summary.passed

    def test_state_cap_samples(self, check_config) -> None:
        ann = annotation("cex_ostb.toml")
        capped = replace(check_config, oracle_max_states=10)
        summary = cross_check(ann, TransformerKind.WP, invariant_plus(ann, "0"), False, capped)
        assert summary.checked_states == 10

    def test_too_large_lower_bound_detected(self, check_config) -> None:
        ann = annotation("cex_ostb.toml")
        summary = cross_check(ann, TransformerKind.WP, invariant_plus(ann, "1"), False, check_config)
        assert not summary.passed
        assert summary.violations

    def test_too_small_upper_bound_detected(self, check_config) -> None:
        ann = annotation("geo_park.toml")
        summary = cross_check(
            ann, TransformerKind.WP, lambda s: evaluate(parse_expectation("b"), s), True, check_config
        )
        assert not summary.passed
        assert all(v.state["a"] == "1" for v in summary.violations)


@pytest.mark.slow
class TestAcceptedBoundsAreSound:
    """Accepted corpus bounds sit on the right side of the least fixed point at every state."""

    @pytest.mark.parametrize("path", accepted_annotations(), ids=lambda p: p.stem)
    def test_bound_against_lfp(self, path: Path, check_config) -> None:
        ann = load_annotation(path).annotation_set
        cert = prove(ann, check_config)
        assert cert.verdict is Verdict.ACCEPTED
        states = list(ann.domain.states())
        assert cert.oracle is not None
        assert cert.oracle.checked_states == len(states)

        upper = ann.rule is RuleId.PARK_UPPER
        fixcfg = check_config.fixpoint.with_truncation(ann.truncation)
        for state in states:
            lfp = eval_transformer(ann.kind, ann.loop, ann.post, state, fixcfg)
            claimed = evaluate(ann.invariant, state)
            if upper:
                assert not exceeds(lfp.value, claimed, tolerance(claimed)), str(state)
            elif lfp.converged and not lfp.is_lower_bound_only:
                assert not exceeds(claimed, lfp.value, tolerance(lfp.value)), str(state)
