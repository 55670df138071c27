"""Symbolic wp / ert transformers for loop-free programs and loop characteristic functions."""

from __future__ import annotations

from fractions import Fraction

from pgcl_certify.core.exceptions import (
    LoopEncounteredError,
    NonConstantUniformBoundsError,
    UndefinedArithmeticError,
)
from pgcl_certify.engine.algebra import ONE, substitute
from pgcl_certify.models.certificates import TransformerKind
from pgcl_certify.syntax.ast import (
    Assign,
    BinOp,
    Expr,
    Ite,
    Iverson,
    Not,
    Num,
    PChoice,
    Pred,
    Program,
    Seq,
    Skip,
    UnifAssign,
    While,
)
from pgcl_certify.syntax.parser import constant_value
from pgcl_certify.syntax.printer import format_expr, format_pred


def _add(left: Expr, right: Expr) -> Expr:
    return BinOp("+", left, right)


def _mul(left: Expr, right: Expr) -> Expr:
    return BinOp("*", left, right)


def _plus_one(expr: Expr) -> Expr:
    return _add(Num(ONE), expr)


def _complement(prob: Expr) -> Expr:
    if isinstance(prob, Num):
        return Num(1 - prob.value)
    return BinOp("-", Num(ONE), prob)


def uniform_values(lo: Expr, hi: Expr) -> range:
    """Integer range of a symbolic ``unif(lo..hi)``; bounds must be constants."""
    lo_value, hi_value = constant_value(lo), constant_value(hi)
    if lo_value is None or hi_value is None:
        raise NonConstantUniformBoundsError(f"{format_expr(lo)}..{format_expr(hi)}")
    if lo_value.denominator != 1 or hi_value.denominator != 1:
        raise UndefinedArithmeticError("unif() bounds must be integers")
    if hi_value < lo_value:
        raise UndefinedArithmeticError(f"empty uniform range {lo_value}..{hi_value}")
    return range(int(lo_value), int(hi_value) + 1)


def _uniform_average(var: str, lo: Expr, hi: Expr, f: Expr) -> Expr:
    values = uniform_values(lo, hi)
    total: Expr | None = None
    for value in values:
        term = substitute(f, var, Num(Fraction(value)))
        total = term if total is None else _add(total, term)
    assert total is not None
    return _mul(Num(Fraction(1, len(values))), total)


def _branch(guard: Pred, then: Expr, orelse: Expr) -> Expr:
    return _add(_mul(Iverson(guard), then), _mul(Iverson(Not(guard)), orelse))


def wp_loopfree(program: Program, f: Expr) -> Expr:
    """Weakest preexpectation of a loop-free program by structural recursion."""
    match program:
        case Skip():
            return f
        case Assign(var, expr):
            return substitute(f, var, expr)
        case UnifAssign(var, lo, hi):
            return _uniform_average(var, lo, hi, f)
        case Seq(left, right):
            return wp_loopfree(left, wp_loopfree(right, f))
        case Ite(guard, then, orelse):
            return _branch(guard, wp_loopfree(then, f), wp_loopfree(orelse, f))
        case PChoice(left, prob, right):
            return _add(
                _mul(prob, wp_loopfree(left, f)),
                _mul(_complement(prob), wp_loopfree(right, f)),
            )
        case While(guard, _):
            raise LoopEncounteredError(format_pred(guard))
    raise TypeError(f"not a program: {program!r}")


def ert_loopfree(program: Program, t: Expr) -> Expr:
    """Expected runtime of a loop-free program plus continuation ``t``.

    Every construct except sequencing costs one unit.
    """
    match program:
        case Skip():
            return _plus_one(t)
        case Assign(var, expr):
            return _plus_one(substitute(t, var, expr))
        case UnifAssign(var, lo, hi):
            return _plus_one(_uniform_average(var, lo, hi, t))
        case Seq(left, right):
            return ert_loopfree(left, ert_loopfree(right, t))
        case Ite(guard, then, orelse):
            return _plus_one(_branch(guard, ert_loopfree(then, t), ert_loopfree(orelse, t)))
        case PChoice(left, prob, right):
            return _plus_one(
                _add(
                    _mul(prob, ert_loopfree(left, t)),
                    _mul(_complement(prob), ert_loopfree(right, t)),
                )
            )
        case While(guard, _):
            raise LoopEncounteredError(format_pred(guard))
    raise TypeError(f"not a program: {program!r}")


def transform_loopfree(kind: TransformerKind, program: Program, f: Expr) -> Expr:
    if kind is TransformerKind.ERT:
        return ert_loopfree(program, f)
    return wp_loopfree(program, f)


def char_apply(kind: TransformerKind, guard: Pred, body: Program, f: Expr, x: Expr) -> Expr:
    """One application of the loop's characteristic function to ``x``."""
    continued = _mul(Iverson(guard), transform_loopfree(kind, body, x))
    result = _add(_mul(Iverson(Not(guard)), f), continued)
    return _plus_one(result) if kind is TransformerKind.ERT else result


def iterate_char(kind: TransformerKind, loop: While, f: Expr, x: Expr, n: int) -> Expr:
    """``n``-fold application of the characteristic function; ``n = 0`` returns ``x``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    for _ in range(n):
        x = char_apply(kind, loop.guard, loop.body, f, x)
    return x
