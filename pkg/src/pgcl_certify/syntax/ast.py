"""Immutable AST for programs, arithmetic/expectation expressions and predicates.

Nodes are frozen dataclasses, so structurally equal trees compare and hash
equal and can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Number = Fraction | float

ARITH_OPS = ("+", "-", "*", "/", "^")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
FUNCTIONS = {"min": 2, "max": 2, "abs": 1, "harm": 1, "mod": 2}


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Num:
    value: Number


@dataclass(frozen=True, slots=True)
class Infinity:
    pass


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Neg:
    operand: Expr


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Iverson:
    pred: Pred


Expr = Num | Infinity | Var | Neg | BinOp | Call | Iverson


# --- predicates ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class And:
    left: Pred
    right: Pred


@dataclass(frozen=True, slots=True)
class Or:
    left: Pred
    right: Pred


@dataclass(frozen=True, slots=True)
class Not:
    operand: Pred


Pred = BoolLit | Cmp | And | Or | Not


# --- statements ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Skip:
    pass


@dataclass(frozen=True, slots=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True, slots=True)
class Seq:
    left: Program
    right: Program


@dataclass(frozen=True, slots=True)
class Ite:
    guard: Pred
    then: Program
    orelse: Program


@dataclass(frozen=True, slots=True)
class PChoice:
    """``{left} [prob] {right}``: left with probability ``prob``."""

    left: Program
    prob: Expr
    right: Program


@dataclass(frozen=True, slots=True)
class While:
    guard: Pred
    body: Program


@dataclass(frozen=True, slots=True)
class UnifAssign:
    var: str
    lo: Expr
    hi: Expr


Program = Skip | Assign | Seq | Ite | PChoice | While | UnifAssign


def num(value: int | str | Fraction) -> Num:
    """Build an exact literal."""
    return Num(Fraction(value))


def seq(*parts: Program) -> Program:
    """Right-nested sequence, the shape the parser produces."""
    if not parts:
        return Skip()
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = Seq(part, result)
    return result


def contains_loop(program: Program) -> bool:
    """True when any ``While`` occurs in the program."""
    match program:
        case While():
            return True
        case Seq(left, right) | PChoice(left, _, right):
            return contains_loop(left) or contains_loop(right)
        case Ite(_, then, orelse):
            return contains_loop(then) or contains_loop(orelse)
        case _:
            return False


def top_level_loops(program: Program) -> list[While]:
    """Loops in the program's top-level statement sequence, in order."""
    match program:
        case While():
            return [program]
        case Seq(left, right):
            return top_level_loops(left) + top_level_loops(right)
        case _:
            return []
