"""Tests for states and finite domains."""

from __future__ import annotations

from fractions import Fraction

import pytest

from pgcl_certify.core.exceptions import DomainError
from pgcl_certify.syntax.domain import State, StateDomain, coerce_number, format_number


class TestState:
    """Immutable, hashable program states."""

    def test_values_normalised(self) -> None:
        state = State(b=2, a=1.0)
        assert list(state) == ["a", "b"]
        assert isinstance(state["a"], Fraction)

    def test_assign_returns_copy(self) -> None:
        state = State(a=1)
        updated = state.assign("a", Fraction(0))
        assert state["a"] == 1
        assert updated["a"] == 0

    def test_assign_new_variable_keeps_order(self) -> None:
        state = State(b=1).assign("a", Fraction(2))
        assert list(state) == ["a", "b"]

    def test_hash_and_equality(self) -> None:
        assert State(a=1, b=2) == State({"b": 2, "a": 1})
        assert hash(State(a=1, b=2)) == hash(State(b=2, a=1))
        assert State(a=1) == {"a": 1}

    def test_restrict(self) -> None:
        assert State(a=1, b=2, c=3).restrict(["a", "c"]) == State(a=1, c=3)

    def test_to_dict(self) -> None:
        assert State(a=Fraction(1, 3), b=2).to_dict() == {"a": "1/3", "b": "2"}

    def test_boolean_rejected(self) -> None:
        with pytest.raises(TypeError):
            coerce_number(True)


class TestStateDomain:
    """Cartesian-product domains."""

    def test_len_and_membership(self) -> None:
        domain = StateDomain.from_ranges({"a": [0, 1], "b": range(3)})
        assert len(domain) == 6
        assert State(a=1, b=2) in domain
        assert State(a=2, b=0) not in domain

    def test_empty_range(self) -> None:
        with pytest.raises(DomainError):
            StateDomain.from_ranges({"a": []})

    def test_require_covers(self) -> None:
        domain = StateDomain.from_ranges({"a": [0]})
        domain.require_covers(["a"])
        with pytest.raises(DomainError, match="b"):
            domain.require_covers(["a", "b"], "loop")

    def test_missing(self) -> None:
        domain = StateDomain.from_ranges({"a": [0]})
        assert domain.missing(["c", "a", "b"]) == ["b", "c"]


class TestFormatNumber:
    def test_forms(self) -> None:
        assert format_number(Fraction(3)) == "3"
        assert format_number(Fraction(1, 3)) == "1/3"
        assert format_number(float("inf")) == "inf"
        assert format_number(2.0) == "2"
        assert format_number(0.5) == "0.5"
