"""Verdict, comparison and certificate models.

These are the values that cross module boundaries and end up in JSON
reports. Numbers are carried as strings (``"1025"``, ``"1/3"``, ``"inf"``)
so exact rationals and infinity survive serialization.
"""

from enum import StrEnum

from pydantic import BaseModel, Field


class TransformerKind(StrEnum):
    """Which expectation transformer a check is about."""

    WP = "wp"  # weakest preexpectation
    ERT = "ert"  # expected runtime


class Ordering(StrEnum):
    """Outcome of a pointwise comparison over a finite domain."""

    LEQ = "LEQ"
    GEQ = "GEQ"
    EQ = "EQ"
    INCOMPARABLE = "INCOMPARABLE"


class Direction(StrEnum):
    SUB = "sub"  # I <= Phi(I)
    SUPER = "super"  # Phi(I) <= I


class Verdict(StrEnum):
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    INCONCLUSIVE = "INCONCLUSIVE"

    @property
    def exit_code(self) -> int:
        return {"ACCEPTED": 0, "REJECTED": 1, "INCONCLUSIVE": 2}[self.value]


class RuleId(StrEnum):
    """Proof rules the engine can apply."""

    PARK_UPPER = "park-upper"
    OST_A = "ost-a"  # almost-surely bounded looping time
    OST_B = "ost-b"  # conditionally difference bounded
    OST_C = "ost-c"  # bounded f and I
    MCIVER_1 = "mciver-1"
    MCIVER_2 = "mciver-2"
    MCIVER_3 = "mciver-3"
    MCIVER_GEN = "mciver-gen"
    ERT_LOWER = "ert-lower"

    @property
    def is_lower_bound(self) -> bool:
        return self is not RuleId.PARK_UPPER


class AstAssertion(StrEnum):
    """User-asserted termination behaviour, weakest to strongest."""

    NONE = "none"
    BODY_AST = "body-ast"
    LOOP_AST = "loop-ast"
    LOOP_PAST = "loop-past"

    @property
    def rank(self) -> int:
        return list(AstAssertion).index(self)

    def implies(self, other: "AstAssertion") -> bool:
        return self.rank >= other.rank


class EvidenceKind(StrEnum):
    EXACT = "exact-on-domain"  # exhaustive check over the domain
    NUMERIC = "numeric"  # fixed-point engine values
    SIMULATION = "simulation"  # Monte Carlo evidence
    SYNTACTIC = "syntactic"
    ASSERTION = "assertion"  # taken from the annotation file


class Caveat(StrEnum):
    DOMAIN_RESTRICTED = "domain-restricted"
    SIMULATION_TERMINATION_EVIDENCE = "simulation-termination-evidence"
    NUMERIC_NESTED_LOOP = "numeric-nested-loop"
    TRUNCATED_ORACLE = "truncated-oracle"
    FLOAT_FALLBACK = "float-fallback"
    ORACLE_DISAGREES = "oracle-disagrees"


class Witness(BaseModel):
    """A domain state together with the values that were compared there."""

    state: dict[str, str] = Field(..., description="Variable assignment")
    lhs: str | None = Field(default=None, description="Left-hand value at the state")
    rhs: str | None = Field(default=None, description="Right-hand value at the state")
    note: str | None = Field(default=None, description="Free-form explanation")

    model_config = {
        "json_schema_extra": {
            "examples": [{"state": {"a": "1", "b": "0", "k": "10"}, "lhs": "1025", "rhs": "1"}]
        }
    }


class ComparisonResult(BaseModel):
    """Pointwise comparison of two expectations over a finite domain.

    ``leq_violations`` are states with lhs > rhs + tol, ``geq_violations``
    states with lhs < rhs - tol.
    """

    verdict: Ordering = Field(..., description="Relation between lhs and rhs on the domain")
    states_checked: int = Field(..., ge=0)
    leq_violations: list[Witness] = Field(default_factory=list)
    geq_violations: list[Witness] = Field(default_factory=list)
    leq_violation_count: int = Field(default=0, ge=0)
    geq_violation_count: int = Field(default=0, ge=0)
    max_violation: str = Field(default="0", description="Largest |lhs - rhs| over violations")
    tol: float = Field(default=0.0, ge=0.0)

    @property
    def holds_leq(self) -> bool:
        return self.verdict in (Ordering.LEQ, Ordering.EQ)

    @property
    def holds_geq(self) -> bool:
        return self.verdict in (Ordering.GEQ, Ordering.EQ)

    @property
    def strict_witnesses(self) -> list[Witness]:
        """States where a LEQ holds strictly (lhs < rhs)."""
        return self.geq_violations if self.verdict is Ordering.LEQ else []


class SideCondition(BaseModel):
    """Result of one side condition of a proof rule."""

    name: str = Field(..., description="Side-condition identifier, e.g. 'subinvariance'")
    passed: bool | None = Field(..., description="None when undetermined")
    evidence: EvidenceKind = Field(..., description="How the condition was established")
    detail: str = Field(default="", description="Human-readable summary")
    value: str | None = Field(default=None, description="Key quantity (e.g. max delta)")
    witnesses: list[Witness] = Field(default_factory=list)


class CdbReport(BaseModel):
    """Conditional difference boundedness of an invariant over a domain."""

    max_delta: str = Field(..., description="Maximum of the expected one-step change")
    argmax: dict[str, str] | None = Field(default=None, description="State attaining the max")
    claimed_bound: str | None = Field(default=None)
    passed: bool | None = Field(default=None, description="None when no bound was claimed")
    states_checked: int = Field(default=0, ge=0)


class OracleSummary(BaseModel):
    """Cross-check of a certified bound against fixed-point values."""

    checked_states: int = Field(default=0, ge=0)
    converged_states: int = Field(default=0, ge=0)
    lower_bound_only_states: int = Field(default=0, ge=0)
    violations: list[Witness] = Field(default_factory=list)
    tol: float = Field(default=0.0, ge=0.0)

    @property
    def passed(self) -> bool:
        return not self.violations


class Certificate(BaseModel):
    """Verdict of one proof-rule application."""

    rule: RuleId
    kind: TransformerKind
    verdict: Verdict
    bound: str = Field(..., description="The certified bound expression")
    post: str = Field(..., description="Postexpectation f (or continuation t)")
    invariant: str
    domain: str
    domain_size: int = Field(..., ge=0)
    side_conditions: list[SideCondition] = Field(default_factory=list)
    caveats: list[Caveat] = Field(default_factory=list)
    cdb: CdbReport | None = None
    oracle: OracleSummary | None = None

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "rule": "ost-b",
                    "kind": "wp",
                    "verdict": "ACCEPTED",
                    "bound": "b + [a != 0]",
                    "post": "b",
                    "invariant": "b + [a != 0]",
                    "domain": "a in {0, 1}; b in 0..10; k in 0..10",
                    "domain_size": 242,
                    "side_conditions": [],
                    "caveats": ["domain-restricted"],
                }
            ]
        }
    }

    @property
    def witness(self) -> Witness | None:
        """First witness of the first failing side condition (or oracle)."""
        for condition in self.side_conditions:
            if condition.passed is False and condition.witnesses:
                return condition.witnesses[0]
        if self.oracle and self.oracle.violations:
            return self.oracle.violations[0]
        return None

    @property
    def failed_conditions(self) -> list[str]:
        return [c.name for c in self.side_conditions if c.passed is False]

    def condition(self, name: str) -> SideCondition | None:
        return next((c for c in self.side_conditions if c.name == name), None)


class UiStateTrace(BaseModel):
    state: dict[str, str]
    lfp: str = Field(..., description="Fixed-point engine value at the state")
    lfp_lower_bound_only: bool = False
    gaps: list[str] = Field(default_factory=list, description="|Phi^n(I) - lfp| for n = 0..n_max")


class UniformIntegrabilityReport(BaseModel):
    """Empirical evidence that Phi^n(I) approaches the least fixed point."""

    n_max: int = Field(..., ge=0)
    states: list[UiStateTrace] = Field(default_factory=list)
    max_gap_by_n: list[str] = Field(default_factory=list)
    final_max_gap: str = "0"
    converging: bool = Field(..., description="Final gap within tolerance on every state")
    tol: float = 0.0
