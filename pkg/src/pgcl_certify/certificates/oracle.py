"""Independent cross-check of certified bounds against fixed-point values.

Upper bounds must dominate the numeric least fixed point; truncated values
are below the true one, so any excess is a real disagreement. Lower bounds
are only compared where the engine converged without truncation.
"""

from __future__ import annotations

from collections.abc import Callable

import structlog

from pgcl_certify.certificates.annotation import AnnotationSet, CheckConfig
from pgcl_certify.certificates.side_conditions import sample_states, witness
from pgcl_certify.core.exceptions import StateSpaceExplosionError
from pgcl_certify.core.parallel import map_states
from pgcl_certify.engine.algebra import exceeds, is_inf
from pgcl_certify.engine.fixpoint import BoundedValue, eval_transformer
from pgcl_certify.models.certificates import OracleSummary, TransformerKind
from pgcl_certify.syntax.ast import Number
from pgcl_certify.syntax.domain import State

logger = structlog.get_logger(__name__)

BoundFn = Callable[[State], Number]


def _scaled_tol(tol: float, value: Number) -> float:
    if is_inf(value):
        return tol
    return tol * max(1.0, abs(float(value)))


def cross_check(
    ann: AnnotationSet,
    kind: TransformerKind,
    bound: BoundFn,
    upper: bool,
    cfg: CheckConfig,
) -> OracleSummary:
    """Compare ``bound`` with ``wp``/``ert`` of the loop on the domain states.

    Every state is checked unless the domain holds more than
    ``cfg.oracle_max_states``, in which case an evenly spread sample of that
    size is checked.
    """
    fixcfg = cfg.fixpoint.with_truncation(ann.truncation)
    states = sample_states(ann.domain, cfg.oracle_max_states)

    def lfp(state: State) -> tuple[State, BoundedValue | None]:
        try:
            return state, eval_transformer(kind, ann.loop, ann.post, state, fixcfg)
        except StateSpaceExplosionError:
            logger.warning("oracle_state_space_exploded", state=str(state))
            return state, None

    results = map_states(lfp, states, cfg.threads)
    summary = OracleSummary(tol=cfg.float_tol)
    for state, value in results:
        if value is None:
            continue
        summary.checked_states += 1
        if value.converged:
            summary.converged_states += 1
        if value.is_lower_bound_only:
            summary.lower_bound_only_states += 1
        claimed = bound(state)
        if upper:
            bad = exceeds(value.value, claimed, _scaled_tol(cfg.float_tol, claimed))
        else:
            exact = value.converged and not value.is_lower_bound_only
            bad = exact and exceeds(claimed, value.value, _scaled_tol(cfg.float_tol, value.value))
        if bad:
            note = "lfp exceeds the upper bound" if upper else "bound exceeds the lfp"
            summary.violations.append(witness(state, claimed, value.value, note))

    logger.info(
        "oracle_checked",
        kind=kind.value,
        upper=upper,
        states=summary.checked_states,
        violations=len(summary.violations),
    )
    return summary
