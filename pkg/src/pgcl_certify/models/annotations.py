"""Annotation file models.

An annotation file is TOML with a ``[program]`` table naming the ``.pgcl``
file, a ``[check]`` table describing the rule application, and an optional
``[constants]`` table. Expectations, predicates and domains stay as text
here; they are parsed when the file is bound to a program.

Example::

    [program]
    path = "cex.pgcl"

    [check]
    rule = "ost-b"
    post = "b"
    invariant = "b + [a != 0]"
    domain = "a in {0, 1}; b in 0..10; k in 0..10"
    cdb_bound = "1"
    ast = "loop-past"
"""

from pydantic import BaseModel, Field, field_validator, model_validator

from pgcl_certify.models.certificates import AstAssertion, RuleId, TransformerKind, Verdict

NumberText = str | int | float

# Keys each rule cannot be checked without.
REQUIRED_KEYS: dict[RuleId, tuple[str, ...]] = {
    RuleId.PARK_UPPER: (),
    RuleId.OST_A: ("looping_bound",),
    RuleId.OST_B: ("cdb_bound",),
    RuleId.OST_C: ("bound_on_f",),
    RuleId.MCIVER_1: ("bound_on_f",),
    RuleId.MCIVER_2: ("bound_on_f", "predicate"),
    RuleId.MCIVER_3: ("bound_on_f", "epsilon"),
    RuleId.MCIVER_GEN: ("bound_on_f", "epsilon", "g"),
    RuleId.ERT_LOWER: ("cdb_bound",),
}


class ProgramSection(BaseModel):
    path: str = Field(..., min_length=1, description="Program file, relative to the annotation")
    loop: int = Field(
        default=1, ge=1, description="Which top-level loop of the program is checked (1-based)"
    )


class CheckSection(BaseModel):
    """What to check and with which side information."""

    rule: RuleId = Field(..., description="Proof rule to apply")
    kind: TransformerKind = Field(default=TransformerKind.WP)
    post: str = Field(..., min_length=1, description="Postexpectation f (continuation t for ert)")
    invariant: str = Field(..., min_length=1, description="Candidate bound I")
    domain: str = Field(..., min_length=1, description="Finite verification domain")
    cdb_bound: NumberText | None = Field(default=None, description="Claimed c.d.b. constant c")
    looping_bound: NumberText | None = Field(
        default=None, description="Almost-sure looping-time bound N, constant or expression"
    )
    bound_on_f: NumberText | None = Field(
        default=None, description="Claimed bound on f, I (and g) over the domain"
    )
    epsilon: NumberText | None = Field(default=None, description="Positive scaling constant")
    g: str | None = Field(default=None, description="Auxiliary bounded postexpectation")
    predicate: str | None = Field(default=None, description="Predicate G with [G] <= termination")
    ast: AstAssertion = Field(default=AstAssertion.NONE, description="Asserted termination")
    truncation: dict[str, list[int]] = Field(
        default_factory=dict,
        description="Per-variable [lo, hi] bounds for truncated value iteration",
    )
    tol: float | None = Field(default=None, ge=0.0)
    samples: int | None = Field(default=None, ge=1)
    evidence_samples: int | None = Field(default=None, ge=1)
    step_cap: int | None = Field(default=None, ge=1)
    expect: Verdict | None = Field(
        default=None, description="Expected verdict, used by regression runs"
    )

    model_config = {"extra": "forbid"}

    @field_validator("truncation")
    @classmethod
    def validate_truncation(cls, value: dict[str, list[int]]) -> dict[str, list[int]]:
        for name, bounds in value.items():
            if len(bounds) != 2 or bounds[0] > bounds[1]:
                raise ValueError(f"truncation for '{name}' must be [lo, hi] with lo <= hi")
        return value

    @model_validator(mode="after")
    def validate_rule_keys(self) -> "CheckSection":
        missing = [key for key in REQUIRED_KEYS[self.rule] if getattr(self, key) is None]
        if missing:
            raise ValueError(f"rule '{self.rule}' requires: {', '.join(missing)}")
        if self.rule is RuleId.ERT_LOWER and self.kind is not TransformerKind.ERT:
            raise ValueError("rule 'ert-lower' requires kind = 'ert'")
        if self.rule not in (RuleId.PARK_UPPER, RuleId.ERT_LOWER) and self.kind is TransformerKind.ERT:
            raise ValueError(f"rule '{self.rule}' is a wp rule; kind must be 'wp'")
        return self


class AnnotationFile(BaseModel):
    program: ProgramSection
    check: CheckSection
    constants: dict[str, NumberText] = Field(
        default_factory=dict, description="Named constants bound into program and expectations"
    )

    model_config = {"extra": "forbid"}
