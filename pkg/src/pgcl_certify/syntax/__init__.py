"""Concrete syntax, AST and state domains for the pGCL dialect."""

from pgcl_certify.syntax.analysis import expr_vars, free_vars, pred_vars, program_vars
from pgcl_certify.syntax.ast import Expr, Pred, Program, While
from pgcl_certify.syntax.domain import State, StateDomain, format_number
from pgcl_certify.syntax.parser import (
    parse_domain,
    parse_expectation,
    parse_predicate,
    parse_program,
    parse_state,
)
from pgcl_certify.syntax.printer import format_expr, format_pred, format_program

__all__ = [
    "Expr",
    "Pred",
    "Program",
    "While",
    "State",
    "StateDomain",
    "format_number",
    "parse_program",
    "parse_expectation",
    "parse_predicate",
    "parse_domain",
    "parse_state",
    "format_expr",
    "format_pred",
    "format_program",
    "expr_vars",
    "pred_vars",
    "program_vars",
    "free_vars",
]
