"""Proof-rule engine.

Each ``prove_*`` function applies exactly one rule to an annotation set and
returns a :class:`Certificate`. The verdict is ACCEPTED only when every side
condition passed on the domain; any failed condition makes it REJECTED and
any undetermined one INCONCLUSIVE. Accepted certificates are then
cross-checked by the oracle and downgraded to INCONCLUSIVE on disagreement.

Subinvariance on its own never yields a lower bound: every lower-bound rule
adds its own uniform-integrability conditions.
"""

from __future__ import annotations

from collections.abc import Callable

import structlog

from pgcl_certify.certificates import side_conditions as sc
from pgcl_certify.certificates.annotation import AnnotationSet, CheckConfig
from pgcl_certify.certificates.oracle import BoundFn, cross_check
from pgcl_certify.core.exceptions import MissingAssertionError
from pgcl_certify.core.parallel import map_states
from pgcl_certify.engine.algebra import (
    INF,
    ONE,
    ZERO,
    eval_pred,
    evaluate,
    exceeds,
    ext_mul,
    fold_constants,
    is_inf,
)
from pgcl_certify.engine.fixpoint import FixpointEngine, eval_transformer
from pgcl_certify.models.certificates import (
    AstAssertion,
    Caveat,
    CdbReport,
    Certificate,
    Direction,
    EvidenceKind,
    RuleId,
    SideCondition,
    TransformerKind,
    UiStateTrace,
    UniformIntegrabilityReport,
    Verdict,
)
from pgcl_certify.syntax.ast import BinOp, Iverson, Num, Number
from pgcl_certify.syntax.domain import State, format_number
from pgcl_certify.syntax.printer import format_expr

logger = structlog.get_logger(__name__)

# Conditions that iterate the whole loop in the fixed-point engine.
_LFP_CONDITIONS = frozenset({"epsilon-termination", "epsilon-dominated"})


class _Certificate:
    """Collects side conditions and caveats for one rule application."""

    def __init__(self, rule: RuleId, kind: TransformerKind, ann: AnnotationSet, cfg: CheckConfig):
        self.rule = rule
        self.kind = kind
        self.ann = ann
        self.cfg = cfg
        self.conditions: list[SideCondition] = []
        self.caveats: list[Caveat] = [Caveat.DOMAIN_RESTRICTED]
        self.cdb: CdbReport | None = None
        if sc.body_has_loop(ann):
            self.caveat(Caveat.NUMERIC_NESTED_LOOP)

    def caveat(self, caveat: Caveat) -> None:
        if caveat not in self.caveats:
            self.caveats.append(caveat)

    def add(self, condition: SideCondition) -> SideCondition:
        self.conditions.append(condition)
        if condition.evidence is EvidenceKind.SIMULATION:
            self.caveat(Caveat.SIMULATION_TERMINATION_EVIDENCE)
        if condition.evidence is EvidenceKind.NUMERIC and self._float_loops(condition):
            self.caveat(Caveat.FLOAT_FALLBACK)
        if condition.passed is False:
            logger.info("side_condition_failed", rule=self.rule.value, condition=condition.name)
        return condition

    def _float_loops(self, condition: SideCondition) -> bool:
        if self.cfg.fixpoint.exact_loops:
            return False
        return condition.name in _LFP_CONDITIONS or sc.body_has_loop(self.ann)

    @property
    def verdict(self) -> Verdict:
        if any(c.passed is False for c in self.conditions):
            return Verdict.REJECTED
        if any(c.passed is None for c in self.conditions):
            return Verdict.INCONCLUSIVE
        return Verdict.ACCEPTED

    def finish(self, bound_text: str, bound: BoundFn, upper: bool = False) -> Certificate:
        verdict = self.verdict
        oracle = None
        if verdict is Verdict.ACCEPTED:
            oracle = cross_check(self.ann, self.kind, bound, upper, self.cfg)
            if oracle.lower_bound_only_states:
                self.caveat(Caveat.TRUNCATED_ORACLE)
            if not oracle.passed:
                self.caveat(Caveat.ORACLE_DISAGREES)
                verdict = Verdict.INCONCLUSIVE
        certificate = Certificate(
            rule=self.rule,
            kind=self.kind,
            verdict=verdict,
            bound=bound_text,
            post=format_expr(self.ann.post),
            invariant=format_expr(self.ann.invariant),
            domain=str(self.ann.domain),
            domain_size=len(self.ann.domain),
            side_conditions=self.conditions,
            caveats=self.caveats,
            cdb=self.cdb,
            oracle=oracle,
        )
        logger.info(
            "rule_checked",
            rule=self.rule.value,
            verdict=verdict.value,
            failed=certificate.failed_conditions,
        )
        return certificate


def _invariant_bound(ann: AnnotationSet) -> tuple[str, BoundFn]:
    return format_expr(ann.invariant), lambda s: evaluate(ann.invariant, s)


def _require_ast(rule: RuleId, ann: AnnotationSet, needed: AstAssertion) -> None:
    if not ann.ast.implies(needed):
        raise MissingAssertionError(rule.value, f"ast = {needed.value}")


def _cdb(cert: _Certificate) -> None:
    report = sc.check_cdb(cert.ann, cert.cfg)
    cert.cdb = report
    cert.add(sc.cdb_condition(report))


def _char_image_finite(cert: _Certificate) -> None:
    phi = sc.phi_values(TransformerKind.WP, cert.ann, cert.ann.invariant, cert.cfg)
    cert.add(sc.finite_condition("finite-char-image", phi.values, "Phi(I)"))


# --- upper bounds --------------------------------------------------------------


def prove_upper_park(kind: TransformerKind, ann: AnnotationSet, cfg: CheckConfig | None = None) -> Certificate:
    """Park induction: ``Phi(I) <= I`` implies ``wp``/``ert`` of the loop is at most ``I``."""
    cfg = cfg or CheckConfig()
    cert = _Certificate(RuleId.PARK_UPPER, kind, ann, cfg)
    cert.add(sc.invariance_condition(Direction.SUPER, kind, ann, cfg))
    text, bound = _invariant_bound(ann)
    return cert.finish(text, bound, upper=True)


# --- optional stopping -----------------------------------------------------------


def prove_lower_ost(rule: RuleId, ann: AnnotationSet, cfg: CheckConfig | None = None) -> Certificate:
    """Lower bound from subinvariance plus one of the optional-stopping criteria.

    ``ost-a``: almost-surely bounded looping time; ``ost-b``: finite expected
    looping time with harmonization and conditional difference boundedness;
    ``ost-c``: bounded ``f`` and ``I`` with an almost-surely terminating loop.
    """
    if rule not in (RuleId.OST_A, RuleId.OST_B, RuleId.OST_C):
        raise ValueError(f"not an optional-stopping rule: {rule}")
    cfg = cfg or CheckConfig()
    _require_ast(rule, ann, AstAssertion.BODY_AST)
    if rule is RuleId.OST_A and ann.looping_bound is None:
        raise MissingAssertionError(rule.value, "looping_bound")
    if rule is RuleId.OST_B:
        _require_ast(rule, ann, AstAssertion.LOOP_PAST)
        if ann.cdb_bound is None:
            raise MissingAssertionError(rule.value, "cdb_bound")
    if rule is RuleId.OST_C:
        _require_ast(rule, ann, AstAssertion.LOOP_AST)
        if ann.bound_on_f is None:
            raise MissingAssertionError(rule.value, "bound_on_f")

    cert = _Certificate(rule, TransformerKind.WP, ann, cfg)
    cert.add(sc.body_ast_condition(ann, cfg))
    cert.add(sc.invariance_condition(Direction.SUB, TransformerKind.WP, ann, cfg))

    if rule is RuleId.OST_A:
        cert.add(sc.finite_on_domain("finite-f-and-I", [ann.post, ann.invariant], ann.domain))
        cert.add(sc.looping_bound_condition(ann, cfg))
        cert.add(sc.finite_iterates_condition(ann, cfg))
    elif rule is RuleId.OST_B:
        cert.add(sc.finite_on_domain("finite-f-and-I", [ann.post, ann.invariant], ann.domain))
        cert.add(sc.expected_looping_time_condition(ann, cfg))
        cert.add(sc.harmonization_condition(ann, cfg))
        _char_image_finite(cert)
        _cdb(cert)
    else:
        cert.add(
            sc.bounded_condition(
                "bounded-f-and-I", [ann.post, ann.invariant], ann.domain, ann.bound_on_f, cfg
            )
        )
        cert.add(sc.loop_ast_condition(ann, cfg))

    text, bound = _invariant_bound(ann)
    return cert.finish(text, bound)


# --- bounded expectations ---------------------------------------------------------


def _termination_probability(ann: AnnotationSet, cfg: CheckConfig) -> Callable[[State], Number]:
    fixcfg = cfg.fixpoint.with_truncation(ann.truncation)

    def probability(state: State) -> Number:
        return FixpointEngine(fixcfg, TransformerKind.WP).value(ann.loop, Num(ONE), state)

    return probability


def prove_lower_mciver(variant: RuleId, ann: AnnotationSet, cfg: CheckConfig | None = None) -> Certificate:
    """Lower bounds for bounded expectations.

    ``mciver-1``: a 0/1-valued harmonized subinvariant ``I`` gives ``T * I``;
    ``mciver-2``: ``[G] <= T`` gives ``[G] * I``; ``mciver-3``:
    ``eps * I <= T`` gives ``I``, where ``T`` is the termination probability.
    ``mciver-gen`` replaces ``T`` by ``wp(loop, g)`` for a bounded ``g`` and
    drops harmonization, but needs an almost-surely terminating body.
    """
    if variant not in (RuleId.MCIVER_1, RuleId.MCIVER_2, RuleId.MCIVER_3, RuleId.MCIVER_GEN):
        raise ValueError(f"not a bounded-expectation rule: {variant}")
    cfg = cfg or CheckConfig()
    if ann.bound_on_f is None:
        raise MissingAssertionError(variant.value, "bound_on_f")
    if variant is RuleId.MCIVER_2 and ann.predicate is None:
        raise MissingAssertionError(variant.value, "predicate")
    if variant in (RuleId.MCIVER_3, RuleId.MCIVER_GEN) and ann.epsilon is None:
        raise MissingAssertionError(variant.value, "epsilon")
    if variant is RuleId.MCIVER_GEN:
        if ann.g is None:
            raise MissingAssertionError(variant.value, "g")
        _require_ast(variant, ann, AstAssertion.BODY_AST)

    cert = _Certificate(variant, TransformerKind.WP, ann, cfg)
    bounded = [ann.post, ann.invariant] + ([ann.g] if ann.g is not None else [])
    cert.add(sc.bounded_condition("bounded-expectations", bounded, ann.domain, ann.bound_on_f, cfg))
    cert.add(sc.invariance_condition(Direction.SUB, TransformerKind.WP, ann, cfg))

    text, bound = _invariant_bound(ann)
    if variant is RuleId.MCIVER_GEN:
        cert.add(sc.body_ast_condition(ann, cfg))
        epsilon, g = ann.epsilon, ann.g
        cert.add(
            sc.lfp_dominates_condition(
                "epsilon-dominated",
                lambda s: ext_mul(epsilon, evaluate(ann.invariant, s)),
                g,
                ann,
                cfg,
                f"{format_number(epsilon)} * I <= wp(loop, {format_expr(g)})",
            )
        )
        return cert.finish(text, bound)

    cert.add(sc.harmonization_condition(ann, cfg))
    if variant is RuleId.MCIVER_1:
        cert.add(sc.indicator_condition(ann))
        probability = _termination_probability(ann, cfg)
        text = f"wp(loop, 1) * ({format_expr(ann.invariant)})"
        return cert.finish(text, lambda s: ext_mul(probability(s), evaluate(ann.invariant, s)))
    if variant is RuleId.MCIVER_2:
        predicate = ann.predicate
        cert.add(sc.guard_termination_condition(ann, cfg))
        guarded = fold_constants(BinOp("*", Iverson(predicate), ann.invariant))
        return cert.finish(
            format_expr(guarded),
            lambda s: evaluate(ann.invariant, s) if eval_pred(predicate, s) else ZERO,
        )

    epsilon = ann.epsilon
    cert.add(
        sc.lfp_dominates_condition(
            "epsilon-termination",
            lambda s: ext_mul(epsilon, evaluate(ann.invariant, s)),
            Num(ONE),
            ann,
            cfg,
            f"{format_number(epsilon)} * I <= wp(loop, 1)",
        )
    )
    return cert.finish(text, bound)


# --- expected runtimes --------------------------------------------------------------


def prove_lower_ert(ann: AnnotationSet, cfg: CheckConfig | None = None) -> Certificate:
    """Runtime subinvariant that harmonizes with ``t``, is c.d.b. and has a finite
    wp-characteristic image is a lower bound on the loop's expected runtime."""
    cfg = cfg or CheckConfig()
    if ann.cdb_bound is None:
        raise MissingAssertionError(RuleId.ERT_LOWER.value, "cdb_bound")
    cert = _Certificate(RuleId.ERT_LOWER, TransformerKind.ERT, ann, cfg)
    cert.add(sc.finite_on_domain("finite-t-and-I", [ann.post, ann.invariant], ann.domain))
    cert.add(sc.invariance_condition(Direction.SUB, TransformerKind.ERT, ann, cfg))
    cert.add(sc.harmonization_condition(ann, cfg))
    _cdb(cert)
    _char_image_finite(cert)
    text, bound = _invariant_bound(ann)
    return cert.finish(text, bound)


def prove(ann: AnnotationSet, cfg: CheckConfig | None = None) -> Certificate:
    """Apply exactly the rule named by the annotation."""
    rule = ann.rule
    if rule is RuleId.PARK_UPPER:
        return prove_upper_park(ann.kind, ann, cfg)
    if rule in (RuleId.OST_A, RuleId.OST_B, RuleId.OST_C):
        return prove_lower_ost(rule, ann, cfg)
    if rule is RuleId.ERT_LOWER:
        return prove_lower_ert(ann, cfg)
    return prove_lower_mciver(rule, ann, cfg)


# --- uniform integrability, empirically --------------------------------------------


def _gap(a: Number, b: Number) -> Number:
    if is_inf(a) or is_inf(b):
        return ZERO if a == b else INF
    return abs(a - b)


def check_uniform_integrability_empirical(
    ann: AnnotationSet, n_max: int, cfg: CheckConfig | None = None
) -> UniformIntegrabilityReport:
    """Gap between ``Phi^n(I)`` and the numeric least fixed point, per sampled state.

    A gap that shrinks to the tolerance is evidence that ``I`` is uniformly
    integrable; a gap bounded away from 0 is evidence that it is not.
    """
    cfg = cfg or CheckConfig()
    kind = ann.kind
    fixcfg = cfg.fixpoint.with_truncation(ann.truncation)
    states = sc.sample_states(ann.domain, cfg.oracle_sample_states)

    def trace(state: State) -> tuple[UiStateTrace, list[Number]]:
        lfp = eval_transformer(kind, ann.loop, ann.post, state, fixcfg)
        engine = FixpointEngine(fixcfg.without_truncation(), kind)
        iterates = engine.iterate(ann.loop, state, ann.post, ann.invariant, n_max)
        gaps = [_gap(value, lfp.value) for value in iterates]
        return (
            UiStateTrace(
                state=state.to_dict(),
                lfp=format_number(lfp.value),
                lfp_lower_bound_only=lfp.is_lower_bound_only,
                gaps=[format_number(g) for g in gaps],
            ),
            gaps,
        )

    rows = map_states(trace, states, cfg.threads)
    max_by_n: list[Number] = []
    for n in range(n_max + 1):
        max_by_n.append(max((gaps[n] for _, gaps in rows), default=ZERO))
    final = max_by_n[-1] if max_by_n else ZERO
    report = UniformIntegrabilityReport(
        n_max=n_max,
        states=[row for row, _ in rows],
        max_gap_by_n=[format_number(g) for g in max_by_n],
        final_max_gap=format_number(final),
        converging=not exceeds(final, 0, cfg.float_tol),
        tol=cfg.float_tol,
    )
    logger.info("uniform_integrability_checked", n_max=n_max, final_gap=report.final_max_gap)
    return report
