"""Command-line front end: annotation files, commands and reports."""

from pgcl_certify.cli.annotations import LoadedAnnotation, load_annotation
from pgcl_certify.cli.commands import build_parser, run

__all__ = ["LoadedAnnotation", "load_annotation", "build_parser", "run"]
