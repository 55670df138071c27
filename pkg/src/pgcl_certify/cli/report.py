"""Human-readable and JSON rendering of command results."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from pgcl_certify.models.certificates import (
    Certificate,
    UniformIntegrabilityReport,
    Verdict,
    Witness,
)
from pgcl_certify.models.estimates import Estimate, LoopingTimeEstimate
from pgcl_certify.models.reports import Report

_MARKS = {True: "ok", False: "FAIL", None: "??"}


def format_witness(witness: Witness) -> str:
    state = ", ".join(f"{name}={value}" for name, value in witness.state.items())
    parts = [f"({state})"]
    if witness.lhs is not None:
        parts.append(f"lhs={witness.lhs}")
    if witness.rhs is not None:
        parts.append(f"rhs={witness.rhs}")
    if witness.note:
        parts.append(witness.note)
    return " ".join(parts)


def render_certificate(cert: Certificate, seeds: list[int] | None = None) -> str:
    lines = [
        f"verdict:   {cert.verdict.value}",
        f"rule:      {cert.rule.value} ({cert.kind.value})",
        f"bound:     {cert.bound}",
        f"post:      {cert.post}",
        f"invariant: {cert.invariant}",
        f"domain:    {cert.domain} ({cert.domain_size} states)",
        "side conditions:",
    ]
    for condition in cert.side_conditions:
        line = f"  [{_MARKS[condition.passed]:>4}] {condition.name} ({condition.evidence.value})"
        if condition.detail:
            line += f": {condition.detail}"
        lines.append(line)
        if condition.passed is False:
            lines.extend(f"         witness {format_witness(w)}" for w in condition.witnesses)

    if cert.cdb is not None:
        argmax = cert.cdb.argmax or {}
        at = ", ".join(f"{k}={v}" for k, v in argmax.items())
        lines.append(
            f"cdb:       max delta {cert.cdb.max_delta} at ({at}), claimed {cert.cdb.claimed_bound}"
        )
    if cert.oracle is not None:
        oracle = cert.oracle
        lines.append(
            f"oracle:    {oracle.checked_states} states, {oracle.converged_states} converged, "
            f"{len(oracle.violations)} violations"
        )
        lines.extend(f"         violation {format_witness(w)}" for w in oracle.violations[:5])
    if cert.caveats:
        lines.append(f"caveats:   {', '.join(c.value for c in cert.caveats)}")
    if cert.verdict is Verdict.REJECTED:
        witness = cert.witness
        lines.append(f"witness:   {format_witness(witness) if witness else '(none recorded)'}")
    if seeds:
        lines.append(f"seeds:     {', '.join(str(s) for s in seeds)}")
    return "\n".join(lines)


def render_uniform_integrability(report: UniformIntegrabilityReport) -> str:
    lines = [f"n_max: {report.n_max}", "max |Phi^n(I) - lfp| by n:"]
    lines.extend(f"  n={n:<4} {gap}" for n, gap in enumerate(report.max_gap_by_n))
    status = "converging" if report.converging else "not converging"
    lines.append(f"final gap {report.final_max_gap} ({status}, tol {report.tol:g})")
    return "\n".join(lines)


def _number(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.6g}"


def render_estimate(what: str, estimate: Estimate) -> str:
    lines = [
        f"{what}: mean {_number(estimate.mean)} +/- {_number(estimate.stderr)} (stderr)",
        f"samples: {estimate.n_samples}, nonterminated fraction {estimate.nonterminated_fraction:g}",
    ]
    if isinstance(estimate, LoopingTimeEstimate):
        lines.append(
            f"terminated runs: {estimate.terminated_samples}, max observed {estimate.max_observed}"
        )
    lines.append(f"seed: {estimate.seed}, step cap: {estimate.step_cap}")
    return "\n".join(lines)


def report_json(report: Report) -> str:
    """Serialize a report; non-finite numbers become ``null``."""
    return report.model_dump_json(indent=2)


def write_report(report: Report, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(report) + "\n", encoding="utf-8")


def report_schema() -> dict[str, Any]:
    return Report.model_json_schema()


def report_schema_json() -> str:
    return json.dumps(report_schema(), indent=2, sort_keys=True)
