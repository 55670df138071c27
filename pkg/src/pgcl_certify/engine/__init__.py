"""Expectation semantics, symbolic transformers and the numeric fixed-point engine."""

from pgcl_certify.engine.algebra import (
    bind_constants,
    compare_on_domain,
    eval_arith,
    eval_pred,
    evaluate,
    substitute,
)
from pgcl_certify.engine.fixpoint import (
    BoundedValue,
    FixpointConfig,
    FixpointEngine,
    Outcome,
    eval_transformer,
    outcome,
)
from pgcl_certify.engine.transformers import (
    char_apply,
    ert_loopfree,
    iterate_char,
    transform_loopfree,
    wp_loopfree,
)

__all__ = [
    "evaluate",
    "eval_arith",
    "eval_pred",
    "substitute",
    "bind_constants",
    "compare_on_domain",
    "wp_loopfree",
    "ert_loopfree",
    "transform_loopfree",
    "char_apply",
    "iterate_char",
    "FixpointConfig",
    "FixpointEngine",
    "BoundedValue",
    "Outcome",
    "eval_transformer",
    "outcome",
]
