"""Integration test fixtures."""

from __future__ import annotations

import os
from unittest.mock import patch

import pytest


@pytest.fixture(autouse=True)
def mock_env():
    """Small Monte Carlo budgets and plain JSON logs for end-to-end runs."""
    with patch.dict(
        os.environ,
        {
            "PGCL_ENVIRONMENT": "ci",
            "PGCL_LOG_LEVEL": "WARNING",
            "PGCL_SAMPLES": "500",
            "PGCL_EVIDENCE_SAMPLES": "300",
            "PGCL_ORACLE_SAMPLE_STATES": "16",
        },
    ):
        from pgcl_certify.core.config import get_settings

        get_settings.cache_clear()
        yield
        get_settings.cache_clear()
