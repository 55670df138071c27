"""Machine-readable report models."""

from typing import Any, Literal

from pydantic import BaseModel, Field

from pgcl_certify import __version__
from pgcl_certify.models.certificates import Certificate, UniformIntegrabilityReport

SCHEMA_VERSION = "1.0"


class Report(BaseModel):
    """Top-level JSON document written by ``check`` and ``ui``.

    The JSON schema of this model is shipped as ``schemas/report.schema.json``.
    """

    tool_version: str = Field(default=__version__)
    schema_version: Literal["1.0"] = Field(default=SCHEMA_VERSION)
    command: str = Field(..., description="CLI command that produced the report")
    annotation: dict[str, Any] = Field(
        default_factory=dict, description="Echo of the annotation file"
    )
    certificate: Certificate | None = None
    uniform_integrability: UniformIntegrabilityReport | None = None
    wall_clock_seconds: float = Field(..., ge=0.0)
    seeds: list[int] = Field(default_factory=list, description="RNG seeds used for evidence")
