"""Pytest fixtures shared by the whole suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from pgcl_certify.certificates.annotation import CheckConfig
from pgcl_certify.core.config import Settings, get_settings
from pgcl_certify.engine.fixpoint import FixpointConfig
from pgcl_certify.simulator.sampler import SimulationConfig

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(autouse=True)
def clear_settings_cache():
    """Every test starts from freshly loaded settings."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def test_settings() -> Settings:
    """Settings that ignore local env files."""
    return Settings(_env_file=None)  # type: ignore[call-arg]


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture
def check_config() -> CheckConfig:
    """A rule-checking configuration with small simulation budgets."""
    return CheckConfig(
        fixpoint=FixpointConfig(),
        simulation=SimulationConfig(samples=2_000, evidence_samples=300, step_cap=10_000),
        oracle_sample_states=16,
    )
