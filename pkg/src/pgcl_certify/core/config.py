"""Toolkit configuration using Pydantic Settings with multi-file support."""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configuration loaded from environment variables.

    Later files override earlier ones; every variable carries the ``PGCL_``
    prefix, e.g. ``PGCL_SAMPLES=20000``.

    Priority (lowest to highest):
    1. .env (base defaults)
    2. env-files/dev.env (development overrides)
    3. OS environment variables
    4. Explicit CLI flags (applied by the command layer)
    """

    model_config = SettingsConfigDict(
        env_prefix="PGCL_",
        env_file=(".env", "env-files/dev.env"),
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "pgcl-certify"
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    ENVIRONMENT: Literal["development", "ci", "production"] = "development"
    LOG_JSON: bool = Field(default=False, description="Force JSON log lines on stderr")

    # Comparison tolerances
    DEFAULT_TOL: float = Field(default=1e-9, gt=0.0, description="Tolerance for exact comparisons")
    FLOAT_TOL: float = Field(
        default=1e-6, gt=0.0, description="Tolerance once floating point values are involved"
    )

    # Fixed-point engine
    FIXPOINT_ABS_TOL: float = Field(default=1e-9, gt=0.0)
    FIXPOINT_MAX_ITERS: int = Field(default=1_000_000, ge=1)
    FIXPOINT_MAX_STATES: int = Field(default=200_000, ge=1)
    DIVERGENCE_THRESHOLD: float = Field(default=1e15, gt=0.0)
    FIXPOINT_EXACT_LOOPS: bool = Field(
        default=False, description="Iterate loops in exact rationals instead of floats"
    )

    # Simulation
    SAMPLES: int = Field(default=100_000, ge=1)
    STEP_CAP: int = Field(default=10_000, ge=1)
    SEED: int = Field(default=0xC0FFEE, ge=0)
    EVIDENCE_SAMPLES: int = Field(
        default=2_000, ge=1, description="Runs per domain state for termination evidence"
    )
    ORACLE_SAMPLE_STATES: int = Field(
        default=64, ge=1, description="Domain states sampled for termination evidence and the uniform-integrability check"
    )
    ORACLE_MAX_STATES: int = Field(
        default=20_000,
        ge=1,
        description="Domains up to this size are cross-checked on every state; larger ones are sampled",
    )

    # Proof rules
    PROBE_DEPTH: int = Field(default=5, ge=0)
    AST_DELTA: float = Field(default=1e-3, ge=0.0, lt=1.0)

    # Parallelism
    THREADS: int = Field(default=1, ge=1, le=64)

    @property
    def is_ci(self) -> bool:
        """Check if running inside a CI pipeline."""
        return self.ENVIRONMENT == "ci"


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
