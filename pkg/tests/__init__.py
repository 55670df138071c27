"""Test suite for pgcl-certify."""
