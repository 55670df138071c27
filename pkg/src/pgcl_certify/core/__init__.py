"""Core utilities: configuration, logging, exceptions, parallel helpers."""

from pgcl_certify.core.config import Settings, get_settings
from pgcl_certify.core.exceptions import (
    AnnotationError,
    ConfigurationError,
    DomainError,
    EvaluationError,
    LoopEncounteredError,
    MissingAssertionError,
    NegativeExpectationError,
    NonConstantUniformBoundsError,
    PgclCertifyError,
    PgclSyntaxError,
    ProbabilityRangeError,
    StateSpaceExplosionError,
    UndefinedArithmeticError,
    UnknownFunctionError,
)

__all__ = [
    "Settings",
    "get_settings",
    "PgclCertifyError",
    "PgclSyntaxError",
    "UnknownFunctionError",
    "DomainError",
    "EvaluationError",
    "NegativeExpectationError",
    "UndefinedArithmeticError",
    "ProbabilityRangeError",
    "LoopEncounteredError",
    "NonConstantUniformBoundsError",
    "StateSpaceExplosionError",
    "MissingAssertionError",
    "AnnotationError",
    "ConfigurationError",
]
