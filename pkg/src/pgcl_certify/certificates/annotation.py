"""Parsed rule inputs: the annotation set and the checking configuration."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from pgcl_certify.core.config import Settings, get_settings
from pgcl_certify.core.exceptions import AnnotationError, DomainError
from pgcl_certify.engine.algebra import bind_constants, bind_constants_expr, substitute_pred
from pgcl_certify.engine.fixpoint import FixpointConfig
from pgcl_certify.models.annotations import AnnotationFile, CheckSection
from pgcl_certify.models.certificates import AstAssertion, RuleId, TransformerKind
from pgcl_certify.simulator.sampler import SimulationConfig
from pgcl_certify.syntax.analysis import expr_vars, free_vars, pred_vars, program_vars
from pgcl_certify.syntax.ast import Expr, Num, Number, Pred, Program, While, top_level_loops
from pgcl_certify.syntax.domain import StateDomain
from pgcl_certify.syntax.parser import (
    constant_value,
    parse_domain,
    parse_expectation,
    parse_predicate,
    parse_program,
)


@dataclass(frozen=True)
class AnnotationSet:
    """A loop together with everything a proof rule needs to know about it."""

    loop: While
    post: Expr
    invariant: Expr
    domain: StateDomain
    rule: RuleId = RuleId.PARK_UPPER
    kind: TransformerKind = TransformerKind.WP
    program: Program | None = None
    cdb_bound: Fraction | None = None
    looping_bound: Expr | None = None
    bound_on_f: Fraction | None = None
    epsilon: Fraction | None = None
    g: Expr | None = None
    predicate: Pred | None = None
    ast: AstAssertion = AstAssertion.NONE
    truncation: Mapping[str, tuple[Number, Number]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        needed = set(free_vars(self.loop)) | expr_vars(self.post) | expr_vars(self.invariant)
        if self.g is not None:
            needed |= expr_vars(self.g)
        if self.predicate is not None:
            needed |= pred_vars(self.predicate)
        if self.looping_bound is not None:
            needed |= expr_vars(self.looping_bound)
        self.domain.require_covers(needed, "loop, post and invariant")
        for name in self.truncation:
            if name not in program_vars(self.loop):
                raise DomainError(f"Truncation names unknown variable '{name}'", variable=name)

    @property
    def whole_program(self) -> Program:
        return self.program if self.program is not None else self.loop


@dataclass(frozen=True)
class CheckConfig:
    """Tolerances and budgets for one rule application."""

    tol: float = 1e-9
    float_tol: float = 1e-6
    fixpoint: FixpointConfig = field(default_factory=FixpointConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    probe_depth: int = 5
    ast_delta: float = 1e-3
    oracle_sample_states: int = 64
    oracle_max_states: int = 20_000
    threads: int = 1

    @classmethod
    def from_settings(
        cls,
        settings: Settings | None = None,
        tol: float | None = None,
        seed: int | None = None,
        samples: int | None = None,
        evidence_samples: int | None = None,
        step_cap: int | None = None,
        threads: int | None = None,
    ) -> CheckConfig:
        settings = settings or get_settings()
        threads = threads or settings.THREADS
        return cls(
            tol=settings.DEFAULT_TOL if tol is None else tol,
            float_tol=max(settings.FLOAT_TOL, tol or 0.0),
            fixpoint=FixpointConfig.from_settings(settings),
            simulation=SimulationConfig.from_settings(
                settings,
                seed=seed,
                samples=samples,
                evidence_samples=evidence_samples,
                step_cap=step_cap,
                threads=threads,
            ),
            probe_depth=settings.PROBE_DEPTH,
            ast_delta=settings.AST_DELTA,
            oracle_sample_states=settings.ORACLE_SAMPLE_STATES,
            oracle_max_states=settings.ORACLE_MAX_STATES,
            threads=threads,
        )


def parse_constant(text: str | int | float, key: str) -> Fraction:
    """Closed rational constant from annotation text such as ``"7/2"``."""
    if isinstance(text, bool):
        raise AnnotationError(f"'{key}' must be a number, got {text}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise AnnotationError(f"'{key}' must be finite, got {text}")
        # decimal literal as written, not its binary approximation
        return Fraction(repr(text))
    value = constant_value(parse_expectation(str(text)))
    if value is None:
        raise AnnotationError(f"'{key}' must be a closed rational constant, got '{text}'")
    return value


def parse_constants(raw: Mapping[str, str | int | float]) -> dict[str, Number]:
    return {name: parse_constant(value, f"constants.{name}") for name, value in raw.items()}


def _select_loop(program: Program, index: int) -> While:
    loops = top_level_loops(program)
    if not loops:
        raise AnnotationError("Program has no top-level while loop to check")
    if index > len(loops):
        raise AnnotationError(f"Program has {len(loops)} top-level loop(s); loop = {index} requested")
    return loops[index - 1]


def build_annotation_set(
    annotation: AnnotationFile,
    program_text: str,
    extra_constants: Mapping[str, Number] | None = None,
) -> AnnotationSet:
    """Parse and bind an annotation file against its program text."""
    check: CheckSection = annotation.check
    constants = {**parse_constants(annotation.constants), **(extra_constants or {})}

    def expectation(text: str) -> Expr:
        return bind_constants_expr(parse_expectation(text), constants)

    program = bind_constants(parse_program(program_text), constants)
    loop = _select_loop(program, annotation.program.loop)

    predicate = None
    if check.predicate is not None:
        predicate = substitute_pred(
            parse_predicate(check.predicate), {k: Num(v) for k, v in constants.items()}
        )

    looping_bound = None
    if check.looping_bound is not None:
        looping_bound = expectation(str(check.looping_bound))

    return AnnotationSet(
        loop=loop,
        post=expectation(check.post),
        invariant=expectation(check.invariant),
        domain=parse_domain(check.domain),
        rule=check.rule,
        kind=check.kind,
        program=program,
        cdb_bound=None if check.cdb_bound is None else parse_constant(check.cdb_bound, "cdb_bound"),
        looping_bound=looping_bound,
        bound_on_f=(
            None if check.bound_on_f is None else parse_constant(check.bound_on_f, "bound_on_f")
        ),
        epsilon=None if check.epsilon is None else parse_constant(check.epsilon, "epsilon"),
        g=None if check.g is None else expectation(check.g),
        predicate=predicate,
        ast=check.ast,
        truncation={
            name: (Fraction(lo), Fraction(hi)) for name, (lo, hi) in check.truncation.items()
        },
    )
