"""Lark-based parsers for programs, expectations, predicates, domains and states."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import structlog
from cachetools import LRUCache, cached
from lark import Lark, Transformer
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
    VisitError,
)

from pgcl_certify.core.exceptions import (
    DomainError,
    PgclCertifyError,
    PgclSyntaxError,
    ProbabilityRangeError,
    UnknownFunctionError,
)
from pgcl_certify.syntax.ast import (
    FUNCTIONS,
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
    Skip,
    UnifAssign,
    Var,
    While,
    seq,
)
from pgcl_certify.syntax.domain import State, StateDomain

logger = structlog.get_logger(__name__)

_START_SYMBOLS = ["program", "expectation", "predicate", "domain", "state"]


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark.open(
        "grammar.lark",
        rel_to=__file__,
        start=_START_SYMBOLS,
        parser="earley",
        lexer="basic",
        propagate_positions=False,
    )


def constant_value(expr: Expr) -> Fraction | None:
    """Exact value of a variable-free arithmetic expression, else None."""
    match expr:
        case Num(value) if isinstance(value, Fraction):
            return value
        case Neg(operand):
            inner = constant_value(operand)
            return None if inner is None else -inner
        case BinOp(op, left, right):
            a, b = constant_value(left), constant_value(right)
            if a is None or b is None:
                return None
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return None if b == 0 else a / b
            if op == "^" and b.denominator == 1 and not (a == 0 and b < 0):
                return a ** int(b)
    return None


class _ToAst(Transformer):
    # programs

    def program(self, items: list) -> Program:
        return items[0]

    def stmts(self, items: list) -> Program:
        return seq(*items)

    def block(self, items: list) -> Program:
        return items[0]

    def skip(self, _items: list) -> Program:
        return Skip()

    def assign(self, items: list) -> Program:
        name, expr = items
        return Assign(str(name), expr)

    def unif_assign(self, items: list) -> Program:
        name, lo, hi = items
        return UnifAssign(str(name), lo, hi)

    def ite(self, items: list) -> Program:
        guard, then, orelse = items
        return Ite(guard, then, orelse)

    def if_then(self, items: list) -> Program:
        guard, then = items
        return Ite(guard, then, Skip())

    def while_loop(self, items: list) -> Program:
        guard, body = items
        return While(guard, body)

    def pchoice(self, items: list) -> Program:
        left, prob, right = items
        value = constant_value(prob)
        if value is not None:
            if not 0 <= value <= 1:
                raise ProbabilityRangeError(str(value))
            prob = Num(value)
        return PChoice(left, prob, right)

    # expressions

    def expectation(self, items: list) -> Expr:
        return items[0]

    def number(self, items: list) -> Expr:
        return Num(Fraction(str(items[0])))

    def infinity(self, _items: list) -> Expr:
        return Infinity()

    def var(self, items: list) -> Expr:
        return Var(str(items[0]))

    def neg(self, items: list) -> Expr:
        return Neg(items[0])

    def add(self, items: list) -> Expr:
        return BinOp("+", items[0], items[1])

    def sub(self, items: list) -> Expr:
        return BinOp("-", items[0], items[1])

    def mul(self, items: list) -> Expr:
        return BinOp("*", items[0], items[1])

    def div(self, items: list) -> Expr:
        return BinOp("/", items[0], items[1])

    def pow(self, items: list) -> Expr:
        return BinOp("^", items[0], items[1])

    def call(self, items: list) -> Expr:
        name, *args = items
        func = str(name)
        if func not in FUNCTIONS:
            raise UnknownFunctionError(func, sorted(FUNCTIONS))
        if len(args) != FUNCTIONS[func]:
            raise PgclSyntaxError(
                f"Function '{func}' takes {FUNCTIONS[func]} argument(s), got {len(args)}",
                line=name.line,
                column=name.column,
            )
        return Call(func, tuple(args))

    def iverson(self, items: list) -> Expr:
        return Iverson(items[0])

    # predicates

    def predicate(self, items: list) -> Pred:
        return items[0]

    def true(self, _items: list) -> Pred:
        return BoolLit(True)

    def false(self, _items: list) -> Pred:
        return BoolLit(False)

    def not_(self, items: list) -> Pred:
        return Not(items[0])

    def and_(self, items: list) -> Pred:
        return And(items[0], items[1])

    def or_(self, items: list) -> Pred:
        return Or(items[0], items[1])

    def cmp_op(self, items: list) -> str:
        op = str(items[0])
        return "=" if op == "==" else op

    def comparison(self, items: list) -> Pred:
        # chained comparisons a < b <= c read as a < b and b <= c
        result: Pred | None = None
        for index in range(1, len(items), 2):
            link = Cmp(items[index], items[index - 1], items[index + 1])
            result = link if result is None else And(result, link)
        assert result is not None
        return result

    # domains and states

    def signed_num(self, items: list) -> Fraction:
        text = "".join(str(t) for t in items)
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"Malformed number '{text}'") from exc

    def interval(self, items: list) -> tuple[Fraction, ...]:
        lo, hi = items
        if lo.denominator != 1 or hi.denominator != 1:
            raise DomainError(f"Malformed range {lo}..{hi}: bounds must be integers")
        if lo > hi:
            raise DomainError(f"Empty range {lo}..{hi}")
        return tuple(Fraction(v) for v in range(int(lo), int(hi) + 1))

    def value_set(self, items: list) -> tuple[Fraction, ...]:
        return tuple(items)

    def decl(self, items: list) -> tuple[str, tuple[Fraction, ...]]:
        name, values = items
        return str(name), values

    def domain(self, items: list) -> StateDomain:
        ranges: dict[str, tuple[Fraction, ...]] = {}
        for name, values in items:
            if name in ranges:
                raise DomainError(f"Duplicate variable '{name}' in domain", variable=name)
            ranges[name] = values
        return StateDomain.from_ranges(ranges)

    def binding(self, items: list) -> tuple[str, Fraction]:
        name, _eq, value = items
        return str(name), value

    def state(self, items: list) -> State:
        values: dict[str, Fraction] = {}
        for name, value in items:
            if name in values:
                raise DomainError(f"Variable '{name}' bound twice in state", variable=name)
            values[name] = value
        return State(values)


def _syntax_error(exc: UnexpectedInput, start: str) -> PgclSyntaxError:
    line = getattr(exc, "line", None)
    column = getattr(exc, "column", None)
    if line is not None and line < 0:
        line = column = None
    expected: set[str] = set()
    if isinstance(exc, UnexpectedToken | UnexpectedEOF):
        expected = set(exc.expected or ())
    elif isinstance(exc, UnexpectedCharacters):
        expected = set(exc.allowed or ())
    where = f" at line {line}, column {column}" if line is not None else " at end of input"
    found = ""
    if isinstance(exc, UnexpectedToken):
        found = f" near '{exc.token}'"
    elif isinstance(exc, UnexpectedCharacters):
        found = f" near '{exc.char}'"
    message = f"Cannot parse {start}{where}{found}"
    if expected:
        message += f"; expected one of: {', '.join(sorted(expected))}"
    return PgclSyntaxError(message, line=line, column=column, expected=sorted(expected))


def _parse(text: str, start: str):
    try:
        tree = _parser().parse(text, start=start)
    except UnexpectedInput as exc:
        error = _syntax_error(exc, start)
        if start == "domain":
            raise DomainError(f"Malformed domain: {error.message}") from exc
        raise error from exc
    try:
        return _ToAst().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, PgclCertifyError):
            raise exc.orig_exc from None
        raise


@cached(cache=LRUCache(maxsize=512))
def parse_program(text: str) -> Program:
    """Parse pGCL program text into an AST."""
    program = _parse(text, "program")
    logger.debug("program_parsed", chars=len(text))
    return program


@cached(cache=LRUCache(maxsize=2048))
def parse_expectation(text: str) -> Expr:
    """Parse an expectation/arithmetic expression; ``[p]`` is an Iverson bracket."""
    return _parse(text, "expectation")


@cached(cache=LRUCache(maxsize=512))
def parse_predicate(text: str) -> Pred:
    return _parse(text, "predicate")


def parse_domain(text: str) -> StateDomain:
    """Parse ``a in {0,1}; b in 0..20`` into a finite domain."""
    return _parse(text, "domain")


def parse_state(text: str) -> State:
    """Parse ``a=1, b=0`` into a state."""
    return _parse(text, "state")
