"""pgcl-certify - inductive bound certification for probabilistic programs."""

__version__ = "1.0.0"
