"""Pretty-printer producing text the parser reads back to an equal AST."""

from __future__ import annotations

import math
from fractions import Fraction

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
    Number,
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

INDENT = "    "

_BINOP_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _exact_decimal(value: Fraction) -> str | None:
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    places = max(twos, fives)
    scaled = abs(value.numerator) * (10**places) // value.denominator
    digits = str(scaled).rjust(places + 1, "0")
    return f"{digits[:-places]}.{digits[-places:]}"


def _format_literal(value: Number) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "(-inf)"
        text = repr(value)
        return f"({text})" if value < 0 else text
    if value < 0:
        return f"(-{_format_literal(-value)})"
    if value.denominator == 1:
        return str(value.numerator)
    decimal = _exact_decimal(value)
    if decimal is not None:
        return decimal
    return f"({value.numerator}/{value.denominator})"


def format_expr(expr: Expr, min_prec: int = 0) -> str:
    """Render an expression, parenthesising below ``min_prec``."""
    match expr:
        case Num(value):
            text, prec = _format_literal(value), _ATOM_PREC
        case Infinity():
            text, prec = "inf", _ATOM_PREC
        case Var(name):
            text, prec = name, _ATOM_PREC
        case Call(func, args):
            text, prec = f"{func}({', '.join(format_expr(a) for a in args)})", _ATOM_PREC
        case Iverson(pred):
            text, prec = f"[{format_pred(pred)}]", _ATOM_PREC
        case Neg(operand):
            text, prec = f"-{format_expr(operand, _NEG_PREC)}", _NEG_PREC
        case BinOp("^", left, right):
            prec = _BINOP_PREC["^"]
            text = f"{format_expr(left, _ATOM_PREC)}^{format_expr(right, _NEG_PREC)}"
        case BinOp(op, left, right):
            prec = _BINOP_PREC[op]
            text = f"{format_expr(left, prec)} {op} {format_expr(right, prec + 1)}"
        case _:
            raise TypeError(f"not an expression: {expr!r}")
    return f"({text})" if prec < min_prec else text


def format_pred(pred: Pred, min_prec: int = 0) -> str:
    match pred:
        case BoolLit(value):
            text, prec = ("true" if value else "false"), 4
        case Cmp(op, left, right):
            text, prec = f"{format_expr(left)} {op} {format_expr(right)}", 4
        case Not(operand):
            text, prec = f"not {format_pred(operand, 3)}", 3
        case And(left, right):
            text, prec = f"{format_pred(left, 2)} and {format_pred(right, 3)}", 2
        case Or(left, right):
            text, prec = f"{format_pred(left, 1)} or {format_pred(right, 2)}", 1
        case _:
            raise TypeError(f"not a predicate: {pred!r}")
    return f"({text})" if prec < min_prec else text


def _flatten(program: Seq) -> list[Program]:
    parts: list[Program] = []
    node: Program = program
    while isinstance(node, Seq):
        parts.append(node.left)
        node = node.right
    parts.append(node)
    return parts


def _lines(program: Program, depth: int) -> list[str]:
    pad = INDENT * depth
    match program:
        case Skip():
            return [pad + "skip"]
        case Assign(var, expr):
            return [pad + f"{var} := {format_expr(expr)}"]
        case UnifAssign(var, lo, hi):
            return [pad + f"{var} := unif({format_expr(lo)}..{format_expr(hi)})"]
        case Seq():
            lines: list[str] = []
            parts = _flatten(program)
            for index, part in enumerate(parts):
                if isinstance(part, Seq):
                    chunk = [pad + "{", *_lines(part, depth + 1), pad + "}"]
                else:
                    chunk = _lines(part, depth)
                if index < len(parts) - 1:
                    chunk[-1] += ";"
                lines.extend(chunk)
            return lines
        case While(guard, body):
            return [
                pad + f"while ({format_pred(guard)}) {{",
                *_lines(body, depth + 1),
                pad + "}",
            ]
        case Ite(guard, then, orelse):
            return [
                pad + f"if ({format_pred(guard)}) {{",
                *_lines(then, depth + 1),
                pad + "} else {",
                *_lines(orelse, depth + 1),
                pad + "}",
            ]
        case PChoice(left, prob, right):
            left_lines, right_lines = _lines(left, 0), _lines(right, 0)
            if len(left_lines) == 1 and len(right_lines) == 1:
                return [pad + f"{{ {left_lines[0]} }} [{format_expr(prob)}] {{ {right_lines[0]} }}"]
            return [
                pad + "{",
                *_lines(left, depth + 1),
                pad + f"}} [{format_expr(prob)}] {{",
                *_lines(right, depth + 1),
                pad + "}",
            ]
    raise TypeError(f"not a program: {program!r}")


def format_program(program: Program) -> str:
    """Render a program as indented concrete syntax."""
    return "\n".join(_lines(program, 0))
