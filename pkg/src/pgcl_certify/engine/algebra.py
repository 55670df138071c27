"""Expectation semantics: extended-real arithmetic, evaluation, substitution, comparison.

Values are ``Fraction`` while everything stays rational and ``float``
otherwise; infinity is ``math.inf``. Conventions:

* ``0 * inf = 0``. A product whose left factor is 0 is 0 without evaluating
  the right factor, so guarded terms like ``[x > 0] * (N / x)`` are total.
* ``inf - inf``, ``inf / inf`` and division by zero raise
  :class:`UndefinedArithmeticError`.
* Signed values are allowed inside expressions; :func:`evaluate` rejects a
  negative final value.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from fractions import Fraction
from functools import lru_cache

import structlog

from pgcl_certify.core.exceptions import (
    AnnotationError,
    DomainError,
    EvaluationError,
    NegativeExpectationError,
    UndefinedArithmeticError,
)
from pgcl_certify.core.parallel import map_states
from pgcl_certify.models.certificates import ComparisonResult, Ordering, Witness
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
from pgcl_certify.syntax.domain import State, StateDomain, format_number

logger = structlog.get_logger(__name__)

INF = math.inf
ZERO = Fraction(0)
ONE = Fraction(1)

MAX_WITNESSES = 5


def is_inf(value: Number) -> bool:
    return isinstance(value, float) and math.isinf(value)


def is_float(value: Number) -> bool:
    return isinstance(value, float) and not math.isinf(value)


def is_integral(value: Number) -> bool:
    if isinstance(value, Fraction):
        return value.denominator == 1
    return math.isfinite(value) and value.is_integer()


# --- extended-real operations ---------------------------------------------


def ext_add(a: Number, b: Number) -> Number:
    if is_inf(a) or is_inf(b):
        if is_inf(a) and is_inf(b) and a != b:
            raise UndefinedArithmeticError("inf - inf is undefined")
        return a if is_inf(a) else b
    return a + b


def ext_sub(a: Number, b: Number) -> Number:
    return ext_add(a, -b)


def ext_mul(a: Number, b: Number) -> Number:
    if a == 0 or b == 0:
        return ZERO
    return a * b


def ext_div(a: Number, b: Number) -> Number:
    if b == 0:
        raise UndefinedArithmeticError("division by zero")
    if is_inf(b):
        if is_inf(a):
            raise UndefinedArithmeticError("inf / inf is undefined")
        return ZERO
    if is_inf(a):
        return a if b > 0 else -a
    return a / b


def ext_pow(a: Number, b: Number) -> Number:
    if is_inf(b):
        raise UndefinedArithmeticError("infinite exponent")
    if is_inf(a):
        if b == 0:
            return ONE
        if b < 0:
            return ZERO
        if a > 0:
            return INF
        if is_integral(b):
            return INF if int(b) % 2 == 0 else -INF
        raise UndefinedArithmeticError("non-integer power of -inf")
    if is_integral(b):
        n = int(b)
        if a == 0 and n < 0:
            raise UndefinedArithmeticError("division by zero in 0^negative")
        return a**n
    if a < 0:
        raise UndefinedArithmeticError(f"non-integer power of negative base {format_number(a)}")
    return float(a) ** float(b)


@lru_cache(maxsize=4096)
def harmonic(n: int) -> Fraction:
    """Exact n-th harmonic number; H_n = 0 for n <= 0."""
    if n <= 0:
        return ZERO
    return sum((Fraction(1, k) for k in range(1, n + 1)), ZERO)


def ext_harm(a: Number) -> Number:
    if is_inf(a):
        return INF if a > 0 else ZERO
    if not is_integral(a):
        raise UndefinedArithmeticError(f"harm() needs an integer argument, got {format_number(a)}")
    return harmonic(int(a))


def ext_mod(a: Number, b: Number) -> Number:
    if is_inf(a) or is_inf(b):
        raise UndefinedArithmeticError("mod() of infinity")
    if b == 0:
        raise UndefinedArithmeticError("mod() by zero")
    return a % b


def _normalize(value: Number) -> Number:
    if isinstance(value, float) and math.isnan(value):
        raise UndefinedArithmeticError("arithmetic produced NaN")
    return value


# --- evaluation -----------------------------------------------------------


def _arith(expr: Expr, state: Mapping[str, Number]) -> Number:
    match expr:
        case Num(value):
            return value
        case Var(name):
            try:
                return state[name]
            except KeyError:
                raise DomainError(
                    f"State does not assign variable '{name}'", variable=name
                ) from None
        case Infinity():
            return INF
        case Iverson(pred):
            return ONE if _pred(pred, state) else ZERO
        case Neg(operand):
            return -_arith(operand, state)
        case BinOp("*", left, right):
            a = _arith(left, state)
            if a == 0:
                return ZERO
            return ext_mul(a, _arith(right, state))
        case BinOp(op, left, right):
            a, b = _arith(left, state), _arith(right, state)
            if op == "+":
                return _normalize(ext_add(a, b))
            if op == "-":
                return _normalize(ext_sub(a, b))
            if op == "/":
                return ext_div(a, b)
            return ext_pow(a, b)
        case Call(func, args):
            values = [_arith(arg, state) for arg in args]
            if func == "min":
                return min(values)
            if func == "max":
                return max(values)
            if func == "abs":
                return abs(values[0])
            if func == "harm":
                return ext_harm(values[0])
            return ext_mod(values[0], values[1])
    raise TypeError(f"not an expression: {expr!r}")


def _pred(pred: Pred, state: Mapping[str, Number]) -> bool:
    match pred:
        case BoolLit(value):
            return value
        case Cmp(op, left, right):
            a, b = _arith(left, state), _arith(right, state)
            if op == "=":
                return a == b
            if op == "!=":
                return a != b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b
        case And(left, right):
            return _pred(left, state) and _pred(right, state)
        case Or(left, right):
            return _pred(left, state) or _pred(right, state)
        case Not(operand):
            return not _pred(operand, state)
    raise TypeError(f"not a predicate: {pred!r}")


def _attach_state(exc: EvaluationError, state: Mapping[str, Number]) -> EvaluationError:
    if exc.state is None:
        text = str(state) if isinstance(state, State) else str(State(state))
        exc.state = text
        exc.details["state"] = text
        exc.message = f"{exc.message} at state ({text})"
        exc.args = (exc.message,)
    return exc


def eval_arith(expr: Expr, state: Mapping[str, Number]) -> Number:
    """Signed evaluation of an arithmetic expression."""
    try:
        return _arith(expr, state)
    except EvaluationError as exc:
        _attach_state(exc, state)
        raise


def eval_pred(pred: Pred, state: Mapping[str, Number]) -> bool:
    try:
        return _pred(pred, state)
    except EvaluationError as exc:
        _attach_state(exc, state)
        raise


def evaluate(expr: Expr, state: Mapping[str, Number]) -> Number:
    """Value of an expectation at a state; negative results are errors."""
    value = eval_arith(expr, state)
    if value < 0:
        raise _attach_state(NegativeExpectationError(format_number(value)), state)
    return value


# --- substitution ---------------------------------------------------------


def substitute_many(expr: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution ``expr[v1/e1, ..., vn/en]``."""
    match expr:
        case Var(name):
            return mapping.get(name, expr)
        case Num() | Infinity():
            return expr
        case Neg(operand):
            return Neg(substitute_many(operand, mapping))
        case BinOp(op, left, right):
            return BinOp(op, substitute_many(left, mapping), substitute_many(right, mapping))
        case Call(func, args):
            return Call(func, tuple(substitute_many(a, mapping) for a in args))
        case Iverson(pred):
            return Iverson(substitute_pred(pred, mapping))
    raise TypeError(f"not an expression: {expr!r}")


def substitute_pred(pred: Pred, mapping: Mapping[str, Expr]) -> Pred:
    match pred:
        case BoolLit():
            return pred
        case Cmp(op, left, right):
            return Cmp(op, substitute_many(left, mapping), substitute_many(right, mapping))
        case And(left, right):
            return And(substitute_pred(left, mapping), substitute_pred(right, mapping))
        case Or(left, right):
            return Or(substitute_pred(left, mapping), substitute_pred(right, mapping))
        case Not(operand):
            return Not(substitute_pred(operand, mapping))
    raise TypeError(f"not a predicate: {pred!r}")


def substitute(expr: Expr, var: str, replacement: Expr) -> Expr:
    """``expr[var/replacement]``: eval(result, s) == eval(expr, s[var := eval(replacement, s)])."""
    return substitute_many(expr, {var: replacement})


def map_program(
    program: Program,
    on_expr: Callable[[Expr], Expr],
    on_pred: Callable[[Pred], Pred],
) -> Program:
    """Rebuild a program with every expression and predicate transformed."""
    match program:
        case Skip():
            return program
        case Assign(var, expr):
            return Assign(var, on_expr(expr))
        case UnifAssign(var, lo, hi):
            return UnifAssign(var, on_expr(lo), on_expr(hi))
        case Seq(left, right):
            return Seq(map_program(left, on_expr, on_pred), map_program(right, on_expr, on_pred))
        case Ite(guard, then, orelse):
            return Ite(
                on_pred(guard),
                map_program(then, on_expr, on_pred),
                map_program(orelse, on_expr, on_pred),
            )
        case PChoice(left, prob, right):
            return PChoice(
                map_program(left, on_expr, on_pred),
                on_expr(prob),
                map_program(right, on_expr, on_pred),
            )
        case While(guard, body):
            return While(on_pred(guard), map_program(body, on_expr, on_pred))
    raise TypeError(f"not a program: {program!r}")


def _assigned(program: Program) -> set[str]:
    match program:
        case Assign(var, _) | UnifAssign(var, _, _):
            return {var}
        case Seq(left, right) | PChoice(left, _, right):
            return _assigned(left) | _assigned(right)
        case Ite(_, then, orelse):
            return _assigned(then) | _assigned(orelse)
        case While(_, body):
            return _assigned(body)
    return set()


def bind_constants(program: Program, constants: Mapping[str, Number]) -> Program:
    """Replace named constants by their values throughout a program."""
    if not constants:
        return program
    clash = sorted(_assigned(program) & set(constants))
    if clash:
        raise AnnotationError(f"Constant(s) {', '.join(clash)} are assigned by the program")
    mapping = {name: Num(value) for name, value in constants.items()}
    return map_program(
        program,
        lambda e: substitute_many(e, mapping),
        lambda p: substitute_pred(p, mapping),
    )


def bind_constants_expr(expr: Expr, constants: Mapping[str, Number]) -> Expr:
    if not constants:
        return expr
    return substitute_many(expr, {name: Num(value) for name, value in constants.items()})


# --- constant folding (display only) ----------------------------------------


def _closed_value(expr: Expr) -> Number | None:
    try:
        value = _arith(expr, {})
    except (EvaluationError, DomainError):
        return None
    return None if is_inf(value) else value


def fold_constants(expr: Expr) -> Expr:
    """Fold variable-free subterms and unit/zero factors for readable output.

    The result is pointwise equal to the input wherever the input is defined.
    """
    match expr:
        case Num() | Var() | Infinity():
            return expr
        case Iverson(pred):
            folded = fold_pred(pred)
            if isinstance(folded, BoolLit):
                return Num(ONE if folded.value else ZERO)
            return Iverson(folded)
        case Neg(operand):
            inner = fold_constants(operand)
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        case Call(func, args):
            folded_call = Call(func, tuple(fold_constants(a) for a in args))
            value = _closed_value(folded_call)
            return folded_call if value is None else Num(value)
        case BinOp(op, left, right):
            a, b = fold_constants(left), fold_constants(right)
            if isinstance(a, Num) and isinstance(b, Num):
                value = _closed_value(BinOp(op, a, b))
                if value is not None:
                    return Num(value)
            if op == "*":
                if _is_num(a, 0) or _is_num(b, 0):
                    return Num(ZERO)
                if _is_num(a, 1):
                    return b
                if _is_num(b, 1):
                    return a
            if op == "+":
                if _is_num(a, 0):
                    return b
                if _is_num(b, 0):
                    return a
            if op in ("-", "/", "^") and _is_num(b, 0 if op == "-" else 1):
                return a
            return BinOp(op, a, b)
    raise TypeError(f"not an expression: {expr!r}")


def fold_pred(pred: Pred) -> Pred:
    match pred:
        case BoolLit():
            return pred
        case Cmp(op, left, right):
            folded = Cmp(op, fold_constants(left), fold_constants(right))
            if isinstance(folded.left, Num) and isinstance(folded.right, Num):
                return BoolLit(_pred(folded, {}))
            return folded
        case Not(operand):
            inner = fold_pred(operand)
            return BoolLit(not inner.value) if isinstance(inner, BoolLit) else Not(inner)
        case And(left, right):
            a, b = fold_pred(left), fold_pred(right)
            if isinstance(a, BoolLit):
                return b if a.value else a
            if isinstance(b, BoolLit):
                return a if b.value else b
            return And(a, b)
        case Or(left, right):
            a, b = fold_pred(left), fold_pred(right)
            if isinstance(a, BoolLit):
                return a if a.value else b
            if isinstance(b, BoolLit):
                return b if b.value else a
            return Or(a, b)
    raise TypeError(f"not a predicate: {pred!r}")


def _is_num(expr: Expr, value: int) -> bool:
    return isinstance(expr, Num) and expr.value == value


# --- linear normal form -----------------------------------------------------

# maps a non-constant term to its coefficient; the ``None`` key holds the constant
LinearTerms = dict[Expr | None, Fraction]


def collect_linear_terms(expr: Expr) -> Expr:
    """Fold constants and gather ``expr`` into ``c1 * t1 + ... + c0``.

    Products and quotients of non-constant parts, Iverson brackets and calls
    stay opaque terms. Expressions with ``inf`` or float literals are only
    folded. The result is pointwise equal to the input wherever the input
    is defined.
    """
    folded = fold_constants(expr)
    terms = _linear_terms(folded)
    return folded if terms is None else _rebuild_linear(terms)


def _is_constant(terms: LinearTerms) -> bool:
    return all(key is None for key in terms)


def _scale(terms: LinearTerms, factor: Fraction) -> LinearTerms:
    return {key: coeff * factor for key, coeff in terms.items()}


def _merge(a: LinearTerms, b: LinearTerms) -> LinearTerms:
    merged = dict(a)
    for key, coeff in b.items():
        merged[key] = merged.get(key, ZERO) + coeff
    return merged


def _mentions_infinity(expr: Expr) -> bool:
    match expr:
        case Infinity():
            return True
        case Neg(operand):
            return _mentions_infinity(operand)
        case BinOp(_, left, right):
            return _mentions_infinity(left) or _mentions_infinity(right)
        case Call(_, args):
            return any(_mentions_infinity(a) for a in args)
    return False


def _linear_terms(expr: Expr) -> LinearTerms | None:
    match expr:
        case Num(value):
            return {None: value} if isinstance(value, Fraction) else None
        case Infinity():
            return None
        case Neg(operand):
            inner = _linear_terms(operand)
            return None if inner is None else _scale(inner, -ONE)
        case BinOp("+" | "-" as op, left, right):
            a, b = _linear_terms(left), _linear_terms(right)
            if a is None or b is None:
                return None
            return _merge(a, b if op == "+" else _scale(b, -ONE))
        case BinOp("*", left, right):
            a, b = _linear_terms(left), _linear_terms(right)
            if a is None or b is None:
                return None
            if _is_constant(a):
                return _scale(b, a.get(None, ZERO))
            if _is_constant(b):
                return _scale(a, b.get(None, ZERO))
            (left_term, ca), (right_term, cb) = _monomial(a), _monomial(b)
            return {BinOp("*", left_term, right_term): ca * cb}
        case BinOp("/", left, right):
            a, b = _linear_terms(left), _linear_terms(right)
            if a is None or b is None:
                return None
            if _is_constant(b) and b.get(None, ZERO) != 0:
                return _scale(a, 1 / b[None])
            numerator, coeff = _monomial(a)
            return {BinOp("/", numerator, _rebuild_linear(b)): coeff}
    if _mentions_infinity(expr):
        return None
    return {expr: ONE}


def _monomial(terms: LinearTerms) -> tuple[Expr, Fraction]:
    """Split ``c * t`` into ``(t, c)``; anything else is its own term with coefficient 1."""
    if len(terms) == 1:
        ((key, coeff),) = terms.items()
        if key is not None and coeff != 0:
            return key, coeff
    return _rebuild_linear(terms), ONE


def _linear_term(key: Expr | None, magnitude: Fraction) -> Expr:
    if key is None:
        return Num(magnitude)
    term = key if magnitude.numerator == 1 else BinOp("*", Num(Fraction(magnitude.numerator)), key)
    if magnitude.denominator != 1:
        term = BinOp("/", term, Num(Fraction(magnitude.denominator)))
    return term


def _rebuild_linear(terms: LinearTerms) -> Expr:
    ordered = [(key, coeff) for key, coeff in terms.items() if key is not None]
    ordered.append((None, terms.get(None, ZERO)))
    result: Expr | None = None
    for key, coeff in ordered:
        if coeff == 0:
            continue
        term = _linear_term(key, abs(coeff))
        if result is None:
            result = term if coeff > 0 else Neg(term)
        else:
            result = BinOp("+" if coeff > 0 else "-", result, term)
    return Num(ZERO) if result is None else result


# --- domain comparison ----------------------------------------------------


def exceeds(a: Number, b: Number, tol: float) -> bool:
    """``a > b + tol`` without losing precision on large exact values."""
    if is_inf(a) or is_inf(b):
        return a != b and a > b
    return (a - b) > tol


def _gap(a: Number, b: Number) -> Number:
    if is_inf(a) or is_inf(b):
        return ZERO if a == b else INF
    return abs(a - b)


def compare_values(
    triples: Iterable[tuple[State, Number, Number]],
    tol: float = 0.0,
) -> ComparisonResult:
    """Classify precomputed ``(state, lhs, rhs)`` triples into an ordering."""
    leq: list[Witness] = []
    geq: list[Witness] = []
    leq_count = geq_count = checked = 0
    worst: Number = ZERO
    for state, lhs, rhs in triples:
        checked += 1
        if exceeds(lhs, rhs, tol):
            leq_count += 1
            worst = max(worst, _gap(lhs, rhs))
            if len(leq) < MAX_WITNESSES:
                leq.append(_witness(state, lhs, rhs))
        elif exceeds(rhs, lhs, tol):
            geq_count += 1
            worst = max(worst, _gap(lhs, rhs))
            if len(geq) < MAX_WITNESSES:
                geq.append(_witness(state, lhs, rhs))

    if not leq_count and not geq_count:
        verdict = Ordering.EQ
    elif not leq_count:
        verdict = Ordering.LEQ
    elif not geq_count:
        verdict = Ordering.GEQ
    else:
        verdict = Ordering.INCOMPARABLE

    return ComparisonResult(
        verdict=verdict,
        states_checked=checked,
        leq_violations=leq,
        geq_violations=geq,
        leq_violation_count=leq_count,
        geq_violation_count=geq_count,
        max_violation=format_number(worst),
        tol=tol,
    )


def _witness(state: State, lhs: Number, rhs: Number) -> Witness:
    return Witness(state=state.to_dict(), lhs=format_number(lhs), rhs=format_number(rhs))


def compare_on_domain(
    f1: Expr,
    f2: Expr,
    domain: StateDomain,
    tol: float = 0.0,
    threads: int = 1,
) -> ComparisonResult:
    """Exhaustively compare two expressions over a finite domain.

    Values are compared as signed reals; EQ requires |f1 - f2| <= tol
    everywhere, with inf equal only to inf.
    """

    def values(state: State) -> tuple[State, Number, Number]:
        return state, eval_arith(f1, state), eval_arith(f2, state)

    result = compare_values(map_states(values, domain.states(), threads), tol)
    logger.debug(
        "domain_compared",
        verdict=result.verdict.value,
        states=result.states_checked,
        max_violation=result.max_violation,
    )
    return result
