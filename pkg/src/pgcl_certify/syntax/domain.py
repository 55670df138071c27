"""Program states and finite verification domains."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction

from pgcl_certify.core.exceptions import DomainError
from pgcl_certify.syntax.ast import Number


def coerce_number(value: int | float | Fraction) -> Number:
    """Normalise a Python number: ints and integral floats become Fractions."""
    if isinstance(value, bool):
        raise TypeError("booleans are not state values")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isfinite(value) and value.is_integer():
            return Fraction(int(value))
        return value
    raise TypeError(f"unsupported state value {value!r}")


def format_number(value: Number) -> str:
    """Human-readable rendering used in reports and witnesses."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value.is_integer():
        return str(int(value))
    return repr(value)


class State(Mapping[str, Number]):
    """Immutable, hashable assignment of variables to numbers."""

    __slots__ = ("_map", "_key", "_hash")

    def __init__(self, values: Mapping[str, int | float | Fraction] | None = None, /, **kwargs):
        data = dict(values or {}, **kwargs)
        self._set({name: coerce_number(data[name]) for name in sorted(data)})

    def _set(self, ordered: dict[str, Number]) -> None:
        self._map = ordered
        self._key = tuple(ordered.items())
        self._hash = hash(self._key)

    @classmethod
    def _from_ordered(cls, ordered: dict[str, Number]) -> State:
        state = cls.__new__(cls)
        state._set(ordered)
        return state

    def __getitem__(self, name: str) -> Number:
        return self._map[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, State):
            return self._key == other._key
        if isinstance(other, Mapping):
            return dict(self._map) == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        return f"State({self})"

    def __str__(self) -> str:
        return ", ".join(f"{name}={format_number(value)}" for name, value in self._key)

    def assign(self, name: str, value: Number) -> State:
        """Return a copy with ``name`` bound to ``value``."""
        value = coerce_number(value)
        if name in self._map:
            ordered = dict(self._map)
            ordered[name] = value
            return State._from_ordered(ordered)
        merged = dict(self._map)
        merged[name] = value
        return State._from_ordered({key: merged[key] for key in sorted(merged)})

    def restrict(self, names: Iterable[str]) -> State:
        keep = set(names)
        return State._from_ordered({k: v for k, v in self._map.items() if k in keep})

    def to_dict(self) -> dict[str, str]:
        return {name: format_number(value) for name, value in self._key}


@dataclass(frozen=True)
class StateDomain:
    """Finite Cartesian product of per-variable value ranges.

    Enumeration is lexicographic by variable name, then ascending value.
    """

    ranges: tuple[tuple[str, tuple[Fraction, ...]], ...]

    @classmethod
    def from_ranges(cls, ranges: Mapping[str, Iterable[int | Fraction]]) -> StateDomain:
        normalized: list[tuple[str, tuple[Fraction, ...]]] = []
        for name in sorted(ranges):
            values = tuple(sorted({Fraction(v) for v in ranges[name]}))
            if not values:
                raise DomainError(f"Empty range for variable '{name}'", variable=name)
            normalized.append((name, values))
        return cls(tuple(normalized))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.ranges)

    def values(self, name: str) -> tuple[Fraction, ...]:
        for var, values in self.ranges:
            if var == name:
                return values
        raise KeyError(name)

    def __len__(self) -> int:
        return math.prod(len(values) for _, values in self.ranges)

    def __iter__(self) -> Iterator[State]:
        return self.states()

    def __contains__(self, state: object) -> bool:
        if not isinstance(state, Mapping):
            return False
        return all(name in state and state[name] in values for name, values in self.ranges)

    def states(self) -> Iterator[State]:
        names = self.variables
        for combo in itertools.product(*(values for _, values in self.ranges)):
            yield State._from_ordered(dict(zip(names, combo, strict=True)))

    def missing(self, names: Iterable[str]) -> list[str]:
        """Variables in ``names`` the domain does not cover."""
        have = set(self.variables)
        return sorted(set(names) - have)

    def require_covers(self, names: Iterable[str], what: str = "analysis") -> None:
        missing = self.missing(names)
        if missing:
            raise DomainError(
                f"Domain does not cover variable(s) {', '.join(missing)} used by the {what}",
                variable=missing[0],
            )

    def __str__(self) -> str:
        parts = []
        for name, values in self.ranges:
            lo, hi = values[0], values[-1]
            contiguous = (
                all(v.denominator == 1 for v in values) and len(values) == int(hi - lo) + 1
            )
            if contiguous and len(values) > 1:
                parts.append(f"{name} in {format_number(lo)}..{format_number(hi)}")
            else:
                parts.append(f"{name} in {{{', '.join(format_number(v) for v in values)}}}")
        return "; ".join(parts)
