"""Custom exceptions for pgcl-certify."""

from typing import Any


class PgclCertifyError(Exception):
    """Base exception for all toolkit errors."""

    def __init__(
        self,
        message: str,
        error_code: str = "UNKNOWN_ERROR",
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class PgclSyntaxError(PgclCertifyError):
    """Raised when a program, expectation or domain text fails to parse."""

    def __init__(
        self,
        message: str,
        line: int | None = None,
        column: int | None = None,
        expected: list[str] | None = None,
    ) -> None:
        super().__init__(
            message=message,
            error_code="SYNTAX_ERROR",
            details={"line": line, "column": column, "expected": expected or []},
        )
        self.line = line
        self.column = column
        self.expected = expected or []


class UnknownFunctionError(PgclCertifyError):
    """Raised when an expression calls a function outside the supported set."""

    def __init__(self, name: str, known: list[str]) -> None:
        super().__init__(
            message=f"Unknown function '{name}' (known: {', '.join(known)})",
            error_code="UNKNOWN_FUNCTION",
            details={"name": name, "known": known},
        )
        self.name = name


class DomainError(PgclCertifyError):
    """Raised for empty, duplicate, malformed or insufficient state domains."""

    def __init__(self, message: str, variable: str | None = None) -> None:
        super().__init__(
            message=message,
            error_code="DOMAIN_ERROR",
            details={"variable": variable},
        )
        self.variable = variable


class EvaluationError(PgclCertifyError):
    """Base for errors raised while evaluating an expression at a state."""

    def __init__(
        self,
        message: str,
        error_code: str,
        state: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(
            message=message if state is None else f"{message} at state ({state})",
            error_code=error_code,
            details={"state": state, **(details or {})},
        )
        self.state = state


class NegativeExpectationError(EvaluationError):
    """Raised when an expectation evaluates to a negative number."""

    def __init__(self, value: str, state: str | None = None) -> None:
        super().__init__(
            message=f"Expectation evaluated to negative value {value}",
            error_code="NEGATIVE_EXPECTATION",
            state=state,
            details={"value": value},
        )
        self.value = value


class UndefinedArithmeticError(EvaluationError):
    """Raised for inf - inf, inf / inf, division by zero and similar."""

    def __init__(self, message: str, state: str | None = None) -> None:
        super().__init__(message=message, error_code="UNDEFINED_ARITHMETIC", state=state)


class ProbabilityRangeError(EvaluationError):
    """Raised when a probabilistic choice probability leaves [0, 1]."""

    def __init__(self, value: str, state: str | None = None) -> None:
        super().__init__(
            message=f"Choice probability {value} is outside [0, 1]",
            error_code="PROBABILITY_RANGE",
            state=state,
            details={"value": value},
        )
        self.value = value


class LoopEncounteredError(PgclCertifyError):
    """Raised when a symbolic transformer meets a while loop."""

    def __init__(self, guard: str) -> None:
        super().__init__(
            message=f"Symbolic transformer cannot handle loop 'while ({guard})'",
            error_code="LOOP_ENCOUNTERED",
            details={"guard": guard},
        )


class NonConstantUniformBoundsError(PgclCertifyError):
    """Raised when symbolic unif(lo..hi) bounds depend on program variables."""

    def __init__(self, bounds: str) -> None:
        super().__init__(
            message=f"Uniform assignment bounds must be constant: {bounds}",
            error_code="NON_CONSTANT_UNIFORM_BOUNDS",
            details={"bounds": bounds},
        )


class StateSpaceExplosionError(PgclCertifyError):
    """Raised when fixed-point tracking exceeds the configured state cap."""

    def __init__(self, tracked: int, cap: int) -> None:
        super().__init__(
            message=f"Tracked {tracked} states, exceeding the cap of {cap}",
            error_code="STATE_SPACE_EXPLOSION",
            details={"tracked": tracked, "cap": cap},
        )
        self.tracked = tracked
        self.cap = cap


class MissingAssertionError(PgclCertifyError):
    """Raised when a proof rule needs an annotation the user did not supply."""

    def __init__(self, rule: str, missing: str) -> None:
        super().__init__(
            message=f"Rule '{rule}' requires '{missing}' in the annotation",
            error_code="MISSING_ASSERTION",
            details={"rule": rule, "missing": missing},
        )
        self.rule = rule
        self.missing = missing


class AnnotationError(PgclCertifyError):
    """Raised when an annotation file is missing keys or holds invalid values."""

    def __init__(
        self,
        message: str,
        path: str | None = None,
        errors: list[str] | None = None,
    ) -> None:
        super().__init__(
            message=message,
            error_code="ANNOTATION_ERROR",
            details={"path": path, "errors": errors or []},
        )
        self.path = path
        self.errors = errors or []


class ConfigurationError(PgclCertifyError):
    """Raised when configuration is invalid or missing."""

    def __init__(
        self,
        message: str,
        config_key: str | None = None,
    ) -> None:
        super().__init__(
            message=message,
            error_code="CONFIGURATION_ERROR",
            details={"config_key": config_key},
        )
        self.config_key = config_key
