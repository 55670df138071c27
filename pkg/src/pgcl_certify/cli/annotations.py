"""Annotation-file loading."""

from __future__ import annotations

import tomllib
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from pgcl_certify.certificates.annotation import AnnotationSet, build_annotation_set
from pgcl_certify.core.exceptions import AnnotationError
from pgcl_certify.models.annotations import AnnotationFile
from pgcl_certify.syntax.ast import Number

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class LoadedAnnotation:
    path: Path
    raw: dict[str, Any]
    file: AnnotationFile
    program_path: Path
    annotation_set: AnnotationSet


def _format_errors(exc: ValidationError) -> list[str]:
    errors = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"])
        errors.append(f"{location}: {error['msg']}" if location else error["msg"])
    return errors


def read_annotation_file(path: Path) -> tuple[dict[str, Any], AnnotationFile]:
    """Parse and validate the TOML annotation file at ``path``."""
    if not path.is_file():
        raise AnnotationError(f"Annotation file not found: {path}", path=str(path))
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise AnnotationError(f"Invalid TOML in {path}: {exc}", path=str(path)) from exc
    try:
        return raw, AnnotationFile.model_validate(raw)
    except ValidationError as exc:
        errors = _format_errors(exc)
        raise AnnotationError(
            f"Invalid annotation file {path}: {'; '.join(errors)}", path=str(path), errors=errors
        ) from exc


def load_annotation(
    path: str | Path, extra_constants: Mapping[str, Number] | None = None
) -> LoadedAnnotation:
    """Read an annotation file and bind it to the program it names.

    The program path is resolved relative to the annotation file.
    """
    path = Path(path)
    raw, file = read_annotation_file(path)
    program_path = (path.parent / file.program.path).resolve()
    if not program_path.is_file():
        raise AnnotationError(f"Program file not found: {program_path}", path=str(path))
    annotation_set = build_annotation_set(
        file, program_path.read_text(encoding="utf-8"), extra_constants
    )
    logger.debug(
        "annotation_loaded",
        path=str(path),
        rule=file.check.rule.value,
        domain_size=len(annotation_set.domain),
    )
    return LoadedAnnotation(path, raw, file, program_path, annotation_set)
