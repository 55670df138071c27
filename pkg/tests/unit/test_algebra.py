"""Tests for extended-real evaluation, substitution and domain comparison."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from pgcl_certify.core.exceptions import (
    AnnotationError,
    DomainError,
    NegativeExpectationError,
    UndefinedArithmeticError,
)
from pgcl_certify.engine.algebra import (
    INF,
    bind_constants,
    collect_linear_terms,
    compare_on_domain,
    eval_arith,
    evaluate,
    fold_constants,
    harmonic,
    substitute,
)
from pgcl_certify.models.certificates import Ordering
from pgcl_certify.syntax.ast import Num, Var, num
from pgcl_certify.syntax.domain import State
from pgcl_certify.syntax.parser import parse_domain, parse_expectation, parse_program
from pgcl_certify.syntax.printer import format_expr


def ev(text: str, **values) -> Fraction | float:
    return evaluate(parse_expectation(text), State(values))


class TestEvaluate:
    """Expectation values at a state."""

    def test_sum_with_iverson(self) -> None:
        assert ev("b + [a != 0]", a=1, b=3) == 4

    def test_counterexample_invariant(self) -> None:
        assert ev("b + [a != 0]*(1 + 2^k)", a=1, b=0, k=10) == 1025

    def test_zero_times_infinity(self) -> None:
        assert ev("[x = 0] * inf", x=1) == 0
        assert ev("inf * 0", x=1) == 0
        assert ev("[x = 0] * inf", x=0) == math.inf

    def test_guarded_division_is_total(self) -> None:
        assert ev("[x > 0] * (3 / x)", x=0) == 0

    def test_infinity_arithmetic(self) -> None:
        assert ev("inf + 1") == INF
        assert ev("2 * inf") == INF
        with pytest.raises(UndefinedArithmeticError):
            ev("inf - inf")
        with pytest.raises(UndefinedArithmeticError):
            ev("inf / inf")

    def test_division_by_zero(self) -> None:
        with pytest.raises(UndefinedArithmeticError) as exc_info:
            ev("1 / x", x=0)
        assert exc_info.value.state == "x=0"

    def test_negative_value_rejected(self) -> None:
        with pytest.raises(NegativeExpectationError) as exc_info:
            ev("x - 2", x=1)
        assert exc_info.value.value == "-1"
        assert eval_arith(parse_expectation("x - 2"), State(x=1)) == -1

    def test_signed_intermediates(self) -> None:
        assert ev("abs(x - 5)", x=2) == 3
        assert ev("max(y - 1, 0)", y=0) == 0

    def test_harmonic(self) -> None:
        assert harmonic(3) == Fraction(11, 6)
        assert harmonic(0) == 0
        assert ev("harm(x)", x=-2) == 0
        assert ev("harm(inf)") == INF

    def test_powers(self) -> None:
        assert ev("(1/3)^x", x=2) == Fraction(1, 9)
        assert ev("2^(x/2)", x=4) == 4
        value = ev("2^(x/2)", x=1)
        assert isinstance(value, float)
        assert value == pytest.approx(math.sqrt(2))

    def test_mod(self) -> None:
        assert ev("mod(y, 2)", y=5) == 1

    def test_unbound_variable(self) -> None:
        with pytest.raises(DomainError):
            ev("z + 1", x=0)


class TestSubstitute:
    """expr[v/e] evaluated at s equals expr at s[v := e(s)]."""

    def test_simple(self) -> None:
        assert substitute(Var("b"), "b", parse_expectation("b + 5")) == parse_expectation("b + 5")

    def test_guard_collapses(self) -> None:
        result = substitute(parse_expectation("b + [a != 0]"), "a", num(0))
        assert format_expr(result) == "b + [0 != 0]"
        for b in range(4):
            assert evaluate(result, State(a=1, b=b)) == b

    def test_inside_iverson(self) -> None:
        result = substitute(parse_expectation("[x < i]"), "i", parse_expectation("N + 1"))
        assert result == parse_expectation("[x < N + 1]")

    def test_substitution_lemma_randomised(self) -> None:
        rng = random.Random(20240601)
        exprs = [
            "x*y + [x < y]*3",
            "max(x, y) + abs(x - y)",
            "[x = y]*x^2 + [not x = y]*(y + 1)",
            "x*(y + 2) - min(x, y)",
        ]
        replacements = ["x + 1", "y*2", "max(x - 1, 0)", "3"]
        for _ in range(200):
            expr = parse_expectation(rng.choice(exprs))
            var = rng.choice(["x", "y"])
            replacement = parse_expectation(rng.choice(replacements))
            state = State(x=rng.randint(0, 6), y=rng.randint(0, 6))
            lhs = eval_arith(substitute(expr, var, replacement), state)
            rhs = eval_arith(expr, state.assign(var, eval_arith(replacement, state)))
            assert lhs == rhs


class TestBindConstants:
    def test_binds_program(self) -> None:
        program = bind_constants(parse_program("i := unif(1..N)"), {"N": Fraction(3)})
        assert program == parse_program("i := unif(1..3)")

    def test_assigned_constant_rejected(self) -> None:
        with pytest.raises(AnnotationError):
            bind_constants(parse_program("N := 1"), {"N": Fraction(3)})


class TestFoldConstants:
    def test_folds_closed_terms(self) -> None:
        folded = fold_constants(parse_expectation("1 + 0*x + 1*(b + 2*3)"))
        assert folded == parse_expectation("1 + (b + 6)")

    def test_folds_decided_guards(self) -> None:
        assert fold_constants(parse_expectation("b + [0 != 0]")) == Var("b")

    def test_pointwise_equal(self) -> None:
        expr = parse_expectation("0.8*(b + 5) + (1 - 0.8)*10")
        folded = fold_constants(expr)
        for b in range(5):
            assert evaluate(folded, State(b=b)) == evaluate(expr, State(b=b))

    def test_keeps_undefined_terms(self) -> None:
        assert fold_constants(parse_expectation("1/0")) == parse_expectation("1/0")
        assert fold_constants(Num(Fraction(2))) == Num(Fraction(2))


class TestCollectLinearTerms:
    """Linear normal form for printed transformers."""

    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("0.8*(b + 5) + (1 - 0.8)*10", "4 * b / 5 + 6"),
            ("2*(x + y) - y", "2 * x + y"),
            ("x - x + 3", "3"),
            ("(x + 1)/2 + x/2", "x + 0.5"),
            ("[x < 1]*(x + 1) + 2*[x < 1]*(x + 1)", "3 * ([x < 1] * (x + 1))"),
            ("0*y", "0"),
        ],
    )
    def test_normal_form(self, text: str, expected: str) -> None:
        assert format_expr(collect_linear_terms(parse_expectation(text))) == expected

    def test_pointwise_equal(self) -> None:
        expr = parse_expectation("1/3*(x + [y > x]*(y - x)) + 2*(x + 1)/3 - harm(y)/6 + 1")
        normal = collect_linear_terms(expr)
        for state in parse_domain("x in 0..4; y in 0..4"):
            assert evaluate(normal, state) == evaluate(expr, state)

    def test_infinity_only_folded(self) -> None:
        expr = parse_expectation("inf + (x + 1)*2")
        assert collect_linear_terms(expr) == parse_expectation("inf + (x + 1)*2")


class TestCompareOnDomain:
    """Pointwise comparison over finite domains."""

    def test_equal(self) -> None:
        f = parse_expectation("b + [a != 0]")
        result = compare_on_domain(f, f, parse_domain("a in {0,1}; b in 0..3"))
        assert result.verdict is Ordering.EQ
        assert result.states_checked == 8

    def test_strictly_below(self) -> None:
        result = compare_on_domain(
            parse_expectation("b + [a != 0]"),
            parse_expectation("b + [a != 0]*(1 + 2^k)"),
            parse_domain("a in {0,1}; b in 0..5; k in 0..5"),
        )
        assert result.verdict is Ordering.LEQ
        assert result.holds_leq
        witness = result.strict_witnesses[0]
        assert witness.state["a"] == "1"

    def test_incomparable(self) -> None:
        result = compare_on_domain(
            parse_expectation("x"), parse_expectation("-1*x + 2"), parse_domain("x in 0..3")
        )
        assert result.verdict is Ordering.INCOMPARABLE
        assert result.leq_violations[0].state == {"x": "2"}
        assert result.geq_violations[0].state == {"x": "0"}
        assert {w.state["x"] for w in result.leq_violations} == {"2", "3"}

    def test_infinity_equal_only_to_infinity(self) -> None:
        domain = parse_domain("x in 0..1")
        assert compare_on_domain(parse_expectation("inf"), parse_expectation("inf"), domain).verdict is Ordering.EQ
        result = compare_on_domain(parse_expectation("x"), parse_expectation("inf"), domain)
        assert result.verdict is Ordering.LEQ
        assert result.max_violation == "inf"

    def test_tolerance(self) -> None:
        domain = parse_domain("x in 0..2")
        result = compare_on_domain(parse_expectation("x"), parse_expectation("x + 1/1000"), domain, tol=0.01)
        assert result.verdict is Ordering.EQ

    def test_transitivity(self) -> None:
        domain = parse_domain("x in 0..4")
        f, g, h = (parse_expectation(t) for t in ("x", "x + [x > 2]", "2*x + 1"))
        assert compare_on_domain(f, g, domain).holds_leq
        assert compare_on_domain(g, h, domain).holds_leq
        assert compare_on_domain(f, h, domain).holds_leq

    def test_threads_match_serial(self) -> None:
        domain = parse_domain("a in 0..5; b in 0..5")
        f, g = parse_expectation("a*b"), parse_expectation("a + b")
        serial = compare_on_domain(f, g, domain)
        parallel = compare_on_domain(f, g, domain, threads=4)
        assert serial == parallel
