"""Variable analysis over expressions, predicates and programs."""

from __future__ import annotations

from pgcl_certify.syntax.ast import (
    And,
    Assign,
    BinOp,
    BoolLit,
    Call,
    Cmp,
    Expr,
    Infinity,
    Ite,
    Iverson,
    Neg,
    Not,
    Num,
    Or,
    PChoice,
    Pred,
    Program,
    Seq,
    Skip,
    UnifAssign,
    Var,
    While,
)


def expr_vars(expr: Expr) -> frozenset[str]:
    """Variables occurring in an expression."""
    match expr:
        case Var(name):
            return frozenset({name})
        case Num() | Infinity():
            return frozenset()
        case Neg(operand):
            return expr_vars(operand)
        case BinOp(_, left, right):
            return expr_vars(left) | expr_vars(right)
        case Call(_, args):
            return frozenset().union(*(expr_vars(a) for a in args))
        case Iverson(pred):
            return pred_vars(pred)
    raise TypeError(f"not an expression: {expr!r}")


def pred_vars(pred: Pred) -> frozenset[str]:
    match pred:
        case BoolLit():
            return frozenset()
        case Cmp(_, left, right):
            return expr_vars(left) | expr_vars(right)
        case And(left, right) | Or(left, right):
            return pred_vars(left) | pred_vars(right)
        case Not(operand):
            return pred_vars(operand)
    raise TypeError(f"not a predicate: {pred!r}")


def program_vars(program: Program) -> frozenset[str]:
    """Every variable read or written anywhere in the program."""
    match program:
        case Skip():
            return frozenset()
        case Assign(var, expr):
            return frozenset({var}) | expr_vars(expr)
        case UnifAssign(var, lo, hi):
            return frozenset({var}) | expr_vars(lo) | expr_vars(hi)
        case Seq(left, right):
            return program_vars(left) | program_vars(right)
        case Ite(guard, then, orelse):
            return pred_vars(guard) | program_vars(then) | program_vars(orelse)
        case PChoice(left, prob, right):
            return expr_vars(prob) | program_vars(left) | program_vars(right)
        case While(guard, body):
            return pred_vars(guard) | program_vars(body)
    raise TypeError(f"not a program: {program!r}")


def _reads(program: Program, written: frozenset[str]) -> tuple[frozenset[str], frozenset[str]]:
    """Return (variables read before being written, variables surely written)."""
    match program:
        case Skip():
            return frozenset(), written
        case Assign(var, expr):
            return expr_vars(expr) - written, written | {var}
        case UnifAssign(var, lo, hi):
            return (expr_vars(lo) | expr_vars(hi)) - written, written | {var}
        case Seq(left, right):
            read_left, after_left = _reads(left, written)
            read_right, after_right = _reads(right, after_left)
            return read_left | read_right, after_right
        case Ite(guard, then, orelse):
            read_then, w_then = _reads(then, written)
            read_else, w_else = _reads(orelse, written)
            return (pred_vars(guard) - written) | read_then | read_else, w_then & w_else
        case PChoice(left, prob, right):
            read_left, w_left = _reads(left, written)
            read_right, w_right = _reads(right, written)
            return (expr_vars(prob) - written) | read_left | read_right, w_left & w_right
        case While(guard, body):
            # the body may run zero times, so nothing it writes is certain
            read_body, _ = _reads(body, written)
            return (pred_vars(guard) - written) | read_body, written
    raise TypeError(f"not a program: {program!r}")


def free_vars(program: Program) -> frozenset[str]:
    """Variables read before being written on some execution path.

    Loop guards count as reads. Writes inside a loop body do not shield
    reads in the guard, since the guard is evaluated before the body runs.
    """
    read, _ = _reads(program, frozenset())
    return read
