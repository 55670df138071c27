"""Side conditions of the proof rules, each checked over the annotation's domain.

Numeric checks run the fixed-point engine without truncation. Loop-free
bodies go through the symbolic characteristic function and are exact;
bodies with nested loops are evaluated numerically per state.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import structlog

from pgcl_certify.certificates.annotation import AnnotationSet, CheckConfig
from pgcl_certify.core.exceptions import (
    NonConstantUniformBoundsError,
    StateSpaceExplosionError,
)
from pgcl_certify.core.parallel import map_states
from pgcl_certify.engine.algebra import (
    MAX_WITNESSES,
    ZERO,
    compare_values,
    eval_arith,
    eval_pred,
    evaluate,
    exceeds,
    ext_add,
    ext_mul,
    ext_sub,
    is_float,
    is_inf,
)
from pgcl_certify.engine.fixpoint import FixpointEngine
from pgcl_certify.engine.transformers import char_apply
from pgcl_certify.models.certificates import (
    CdbReport,
    ComparisonResult,
    Direction,
    EvidenceKind,
    SideCondition,
    TransformerKind,
    Witness,
)
from pgcl_certify.simulator.sampler import estimate_looping_time, termination_frequency
from pgcl_certify.syntax.ast import (
    BinOp,
    Call,
    Expr,
    Infinity,
    Iverson,
    Neg,
    Number,
    Program,
    While,
    contains_loop,
)
from pgcl_certify.syntax.domain import State, StateDomain, format_number
from pgcl_certify.syntax.printer import format_expr

logger = structlog.get_logger(__name__)


def witness(
    state: State,
    lhs: Number | None = None,
    rhs: Number | None = None,
    note: str | None = None,
) -> Witness:
    return Witness(
        state=state.to_dict(),
        lhs=None if lhs is None else format_number(lhs),
        rhs=None if rhs is None else format_number(rhs),
        note=note,
    )


def sample_states(domain: StateDomain, limit: int) -> list[State]:
    """Up to ``limit`` domain states, evenly spread over the enumeration order."""
    states = list(domain.states())
    if len(states) <= limit:
        return states
    if limit == 1:
        return [states[0]]
    step = (len(states) - 1) / (limit - 1)
    return [states[round(i * step)] for i in range(limit)]


def effective_tol(values: Iterable[Number], cfg: CheckConfig, tol: float | None = None) -> float:
    """The exact tolerance, widened to the float tolerance once floats are involved."""
    base = cfg.tol if tol is None else tol
    if any(is_float(v) for v in values):
        return max(base, cfg.float_tol)
    return base


def body_has_loop(ann: AnnotationSet) -> bool:
    return contains_loop(ann.loop.body)


def _exact_engine(cfg: CheckConfig, kind: TransformerKind) -> FixpointEngine:
    return FixpointEngine(cfg.fixpoint.without_truncation(), kind)


# --- characteristic function over the domain ---------------------------------


@dataclass(frozen=True)
class PhiValues:
    """``(state, Phi(x)(state))`` for every domain state."""

    values: list[tuple[State, Number]]
    numeric: bool


def phi_values(kind: TransformerKind, ann: AnnotationSet, x: Expr, cfg: CheckConfig) -> PhiValues:
    """One application of the loop's characteristic function to ``x`` on the domain."""
    loop = ann.loop
    states = list(ann.domain.states())
    if not body_has_loop(ann):
        try:
            image = char_apply(kind, loop.guard, loop.body, ann.post, x)
        except NonConstantUniformBoundsError:
            image = None
        if image is not None:
            values = map_states(lambda s: (s, evaluate(image, s)), states, cfg.threads)
            return PhiValues(values, numeric=False)

    def numeric(state: State) -> tuple[State, Number]:
        return state, _exact_engine(cfg, kind).char_value(loop, state, ann.post, x)

    return PhiValues(map_states(numeric, states, cfg.threads), numeric=True)


def check_invariant(
    direction: Direction,
    kind: TransformerKind,
    ann: AnnotationSet,
    tol: float | None = None,
    cfg: CheckConfig | None = None,
) -> ComparisonResult:
    """Compare ``I`` with ``Phi(I)`` on the domain.

    The result is oriented so that the condition holds iff ``holds_leq``:
    SUB compares ``I`` against ``Phi(I)``, SUPER compares ``Phi(I)`` against ``I``.
    """
    cfg = cfg or CheckConfig()
    phi = phi_values(kind, ann, ann.invariant, cfg)
    triples = []
    for state, image in phi.values:
        current = evaluate(ann.invariant, state)
        triples.append((state, current, image) if direction is Direction.SUB else (state, image, current))
    used_tol = effective_tol((v for t in triples for v in t[1:]), cfg, tol)
    result = compare_values(triples, used_tol)
    logger.debug(
        "invariant_checked",
        direction=direction.value,
        kind=kind.value,
        verdict=result.verdict.value,
        numeric=phi.numeric,
    )
    return result


def invariance_condition(
    direction: Direction, kind: TransformerKind, ann: AnnotationSet, cfg: CheckConfig
) -> SideCondition:
    name = {
        (Direction.SUB, TransformerKind.WP): "subinvariance",
        (Direction.SUB, TransformerKind.ERT): "runtime-subinvariance",
        (Direction.SUPER, TransformerKind.WP): "superinvariance",
        (Direction.SUPER, TransformerKind.ERT): "runtime-superinvariance",
    }[(direction, kind)]
    result = check_invariant(direction, kind, ann, cfg=cfg)
    relation = "I <= Phi(I)" if direction is Direction.SUB else "Phi(I) <= I"
    return SideCondition(
        name=name,
        passed=result.holds_leq,
        evidence=EvidenceKind.NUMERIC if body_has_loop(ann) else EvidenceKind.EXACT,
        detail=(
            f"{relation} on {result.states_checked} states"
            if result.holds_leq
            else f"{relation} fails on {result.leq_violation_count} of {result.states_checked} states"
        ),
        value=result.max_violation if not result.holds_leq else None,
        witnesses=result.leq_violations,
    )


# --- harmonization -----------------------------------------------------------


def check_harmonization(ann: AnnotationSet, tol: float = 0.0) -> tuple[bool, Witness | None]:
    """``I`` agrees with the postexpectation on every guard-false domain state."""
    triples = [
        (s, evaluate(ann.invariant, s), evaluate(ann.post, s))
        for s in ann.domain.states()
        if not eval_pred(ann.loop.guard, s)
    ]
    result = compare_values(triples, tol)
    if result.holds_leq and result.holds_geq:
        return True, None
    first = (result.leq_violations or result.geq_violations)[0]
    return False, first


def harmonization_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    passed, bad = check_harmonization(ann, cfg.tol)
    return SideCondition(
        name="harmonization",
        passed=passed,
        evidence=EvidenceKind.EXACT,
        detail="I = f on guard-false states" if passed else "I differs from f on a guard-false state",
        witnesses=[] if bad is None else [bad],
    )


# --- conditional difference boundedness ---------------------------------------


def delta(invariant: Expr, loop: While, state: State, cfg: CheckConfig | None = None) -> Number:
    """Expected absolute change of ``invariant`` over one loop iteration from ``state``; 0 off-guard."""
    cfg = cfg or CheckConfig()
    if not eval_pred(loop.guard, state):
        return ZERO
    here = evaluate(invariant, state)
    result = _exact_engine(cfg, TransformerKind.WP).outcome(loop.body, state)
    total: Number = ZERO
    for successor, mass in result.dist.items():
        change = ext_sub(eval_arith(invariant, successor), here)
        total = ext_add(total, ext_mul(mass, abs(change)))
    return total


def check_cdb(ann: AnnotationSet, cfg: CheckConfig | None = None) -> CdbReport:
    """Maximum of :func:`delta` over the domain, against the claimed bound if any."""
    cfg = cfg or CheckConfig()
    states = list(ann.domain.states())
    deltas = map_states(lambda s: delta(ann.invariant, ann.loop, s, cfg), states, cfg.threads)
    best: Number = ZERO
    argmax: State | None = None
    for state, value in zip(states, deltas, strict=True):
        if argmax is None or value > best:
            best, argmax = value, state
    passed = None
    if ann.cdb_bound is not None:
        passed = not exceeds(best, ann.cdb_bound, effective_tol(deltas, cfg))
    report = CdbReport(
        max_delta=format_number(best),
        argmax=None if argmax is None else argmax.to_dict(),
        claimed_bound=None if ann.cdb_bound is None else format_number(ann.cdb_bound),
        passed=passed,
        states_checked=len(states),
    )
    logger.debug("cdb_checked", max_delta=report.max_delta, claimed=report.claimed_bound, passed=passed)
    return report


def cdb_condition(report: CdbReport) -> SideCondition:
    witnesses = []
    if report.passed is False and report.argmax is not None:
        witnesses = [Witness(state=report.argmax, lhs=report.max_delta, rhs=report.claimed_bound, note="delta(I) > c")]
    return SideCondition(
        name="cdb",
        passed=report.passed,
        evidence=EvidenceKind.NUMERIC,
        detail=f"max delta(I) = {report.max_delta}, claimed c = {report.claimed_bound}",
        value=report.max_delta,
        witnesses=witnesses,
    )


# --- boundedness and finiteness -------------------------------------------------


def bounded_condition(
    name: str, exprs: Sequence[Expr], domain: StateDomain, bound: Number, cfg: CheckConfig
) -> SideCondition:
    """Every expression is at most ``bound`` on the domain."""
    bad: list[Witness] = []
    worst: Number = ZERO
    for state in domain.states():
        for expr in exprs:
            value = evaluate(expr, state)
            worst = max(worst, value)
            if exceeds(value, bound, effective_tol([value], cfg)) and len(bad) < MAX_WITNESSES:
                bad.append(witness(state, value, bound, f"{format_expr(expr)} exceeds the bound"))
    return SideCondition(
        name=name,
        passed=not bad,
        evidence=EvidenceKind.EXACT,
        detail=f"max {format_number(worst)} against bound {format_number(bound)}",
        value=format_number(worst),
        witnesses=bad,
    )


def finite_condition(name: str, values: Iterable[tuple[State, Number]], what: str) -> SideCondition:
    bad = [witness(s, v, note=f"{what} is infinite") for s, v in values if is_inf(v)]
    return SideCondition(
        name=name,
        passed=not bad,
        evidence=EvidenceKind.EXACT,
        detail=f"{what} finite on the domain" if not bad else f"{what} infinite on {len(bad)} states",
        witnesses=bad[:MAX_WITNESSES],
    )


def finite_on_domain(name: str, exprs: Sequence[Expr], domain: StateDomain) -> SideCondition:
    values = [(s, evaluate(e, s)) for s in domain.states() for e in exprs]
    return finite_condition(name, values, " and ".join(format_expr(e) for e in exprs))


def _has_infinity(expr: Expr) -> bool:
    match expr:
        case Infinity():
            return True
        case Neg(operand):
            return _has_infinity(operand)
        case BinOp(_, left, right):
            return _has_infinity(left) or _has_infinity(right)
        case Call(_, args):
            return any(_has_infinity(a) for a in args)
        case Iverson():
            return False
    return False


def finite_iterates_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    """``Phi^n(I)`` finite on the domain for every ``n``.

    Loop-free bodies with infinity-free ``f`` and ``I`` satisfy
    this syntactically; otherwise iterates are probed up to the probe depth.
    """
    if not body_has_loop(ann) and not (_has_infinity(ann.post) or _has_infinity(ann.invariant)):
        return SideCondition(
            name="finite-iterates",
            passed=True,
            evidence=EvidenceKind.SYNTACTIC,
            detail="loop-free body with finite f and I",
        )

    def probe(state: State) -> tuple[State, Number]:
        engine = _exact_engine(cfg, TransformerKind.WP)
        iterates = engine.iterate(ann.loop, state, ann.post, ann.invariant, cfg.probe_depth)
        return state, max(iterates)

    condition = finite_condition(
        "finite-iterates",
        map_states(probe, list(ann.domain.states()), cfg.threads),
        f"Phi^n(I) for n <= {cfg.probe_depth}",
    )
    return condition.model_copy(update={"evidence": EvidenceKind.NUMERIC})


# --- termination evidence -------------------------------------------------------


def _evidence_states(ann: AnnotationSet, cfg: CheckConfig, guarded: bool = False) -> list[State]:
    states = sample_states(ann.domain, cfg.oracle_sample_states)
    if not guarded:
        return states
    return [s for s in states if eval_pred(ann.loop.guard, s)]


def body_ast_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    """Body terminates almost surely: syntactic for loop-free bodies, sampled otherwise."""
    if not body_has_loop(ann):
        return SideCondition(
            name="body-ast",
            passed=True,
            evidence=EvidenceKind.SYNTACTIC,
            detail="loop-free body always terminates",
        )
    return _frequency_condition("body-ast", ann.loop.body, _evidence_states(ann, cfg, guarded=True), cfg)


def loop_ast_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    return _frequency_condition("loop-ast", ann.loop, _evidence_states(ann, cfg), cfg)


def _frequency_condition(
    name: str, program: Program, states: list[State], cfg: CheckConfig
) -> SideCondition:
    sim = cfg.simulation
    threshold = 1.0 - cfg.ast_delta
    frequencies = map_states(
        lambda s: (s, termination_frequency(program, s, sim.evidence_samples, sim.seed, sim.step_cap)),
        states,
        cfg.threads,
    )
    bad = [witness(s, note=f"termination frequency {freq:.4f}") for s, freq in frequencies if freq < threshold]
    lowest = min((freq for _, freq in frequencies), default=1.0)
    if bad:
        logger.info("side_condition_failed", condition=name, lowest_frequency=lowest)
    return SideCondition(
        name=name,
        passed=not bad,
        evidence=EvidenceKind.SIMULATION,
        detail=(
            f"lowest termination frequency {lowest:.4f} over {len(states)} states "
            f"({sim.evidence_samples} runs each, step cap {sim.step_cap})"
        ),
        value=f"{lowest:.6g}",
        witnesses=bad[:MAX_WITNESSES],
    )


def expected_looping_time_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    """Sampled looping time: every run terminates within the cap (up to ``ast_delta``)."""
    sim = cfg.simulation
    states = _evidence_states(ann, cfg)
    estimates = map_states(
        lambda s: (s, estimate_looping_time(ann.loop, s, sim.evidence_samples, sim.seed, sim.step_cap)),
        states,
        cfg.threads,
    )
    bad = [
        witness(s, note=f"{est.nonterminated_fraction:.4f} of runs hit the step cap")
        for s, est in estimates
        if est.nonterminated_fraction > cfg.ast_delta
    ]
    worst = max((est.mean for _, est in estimates), default=0.0)
    return SideCondition(
        name="finite-expected-looping-time",
        passed=not bad,
        evidence=EvidenceKind.SIMULATION,
        detail=f"largest sampled mean looping time {worst:.4g} over {len(states)} states",
        value=f"{worst:.6g}",
        witnesses=bad[:MAX_WITNESSES],
    )


def looping_bound_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    """No sampled run exceeds the asserted looping-time bound ``N(s)``."""
    assert ann.looping_bound is not None
    sim = cfg.simulation
    states = _evidence_states(ann, cfg)
    estimates = map_states(
        lambda s: (s, estimate_looping_time(ann.loop, s, sim.evidence_samples, sim.seed, sim.step_cap)),
        states,
        cfg.threads,
    )
    bad: list[Witness] = []
    for state, est in estimates:
        limit = evaluate(ann.looping_bound, state)
        observed = est.max_observed
        if est.nonterminated_fraction > 0 or (observed is not None and observed > limit):
            bad.append(witness(state, observed, limit, "sampled looping time exceeds N(s)"))
    return SideCondition(
        name="bounded-looping-time",
        passed=not bad,
        evidence=EvidenceKind.SIMULATION,
        detail=f"max observed looping time within N(s) = {format_expr(ann.looping_bound)} on {len(states)} states",
        witnesses=bad[:MAX_WITNESSES],
    )


# --- comparisons against numeric least fixed points -------------------------------


def lfp_dominates_condition(
    name: str,
    lhs: Callable[[State], Number],
    post: Expr,
    ann: AnnotationSet,
    cfg: CheckConfig,
    description: str,
) -> SideCondition:
    """``lhs(s) <= wp(loop, post)(s)`` on the domain, with the truncated engine.

    Truncated or unconverged values are lower bounds on the true value, so a
    pass stays sound.
    """
    fixcfg = cfg.fixpoint.with_truncation(ann.truncation)

    def check(state: State) -> tuple[State, Number, Number | None]:
        engine = FixpointEngine(fixcfg, TransformerKind.WP)
        try:
            value = engine.value(ann.loop, post, state)
        except StateSpaceExplosionError:
            return state, lhs(state), None
        return state, lhs(state), value

    rows = map_states(check, list(ann.domain.states()), cfg.threads)
    undetermined = [w for w in rows if w[2] is None]
    triples = [(s, a, b) for s, a, b in rows if b is not None]
    result = compare_values(triples, effective_tol((v for t in triples for v in t[1:]), cfg))
    passed: bool | None = result.holds_leq
    if passed and undetermined:
        passed = None
    return SideCondition(
        name=name,
        passed=passed,
        evidence=EvidenceKind.NUMERIC,
        detail=f"{description} on {result.states_checked} states"
        + (f", {len(undetermined)} undetermined" if undetermined else ""),
        value=result.max_violation if not result.holds_leq else None,
        witnesses=result.leq_violations,
    )


def indicator_condition(ann: AnnotationSet) -> SideCondition:
    """``I`` takes only the values 0 and 1 on the domain."""
    bad = []
    for state in ann.domain.states():
        value = evaluate(ann.invariant, state)
        if value not in (0, 1):
            bad.append(witness(state, value, note="I is not 0/1-valued"))
    return SideCondition(
        name="indicator-invariant",
        passed=not bad,
        evidence=EvidenceKind.EXACT,
        detail="I is an Iverson bracket on the domain" if not bad else "I takes values other than 0 and 1",
        witnesses=bad[:MAX_WITNESSES],
    )


def guard_termination_condition(ann: AnnotationSet, cfg: CheckConfig) -> SideCondition:
    """``[G] <= T``: runs from every ``G``-state terminate with frequency at least ``1 - ast_delta``."""
    assert ann.predicate is not None
    states = [s for s in sample_states(ann.domain, cfg.oracle_sample_states) if eval_pred(ann.predicate, s)]
    return _frequency_condition("guard-terminates", ann.loop, states, cfg)

