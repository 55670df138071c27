"""Argparse command-line interface.

Exit codes: 0 ACCEPTED, 1 REJECTED, 2 INCONCLUSIVE, 3 usage, parse or
annotation errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

import structlog

from pgcl_certify import __version__
from pgcl_certify.certificates.annotation import CheckConfig, parse_constant
from pgcl_certify.certificates.rules import check_uniform_integrability_empirical, prove
from pgcl_certify.cli.annotations import load_annotation
from pgcl_certify.cli.report import (
    render_certificate,
    render_estimate,
    render_uniform_integrability,
    report_schema_json,
    write_report,
)
from pgcl_certify.core.config import Settings, get_settings
from pgcl_certify.core.exceptions import ConfigurationError, PgclCertifyError
from pgcl_certify.core.logging import configure_logging
from pgcl_certify.engine.algebra import bind_constants, bind_constants_expr, collect_linear_terms
from pgcl_certify.engine.fixpoint import FixpointConfig, eval_transformer
from pgcl_certify.engine.transformers import transform_loopfree
from pgcl_certify.models.certificates import TransformerKind
from pgcl_certify.models.estimates import Estimate
from pgcl_certify.models.reports import Report
from pgcl_certify.simulator.sampler import (
    SimulationConfig,
    estimate_ert,
    estimate_induced_process,
    estimate_looping_time,
    estimate_post,
)
from pgcl_certify.syntax.ast import Expr, Number, Program, While, top_level_loops
from pgcl_certify.syntax.domain import State, format_number
from pgcl_certify.syntax.parser import (
    parse_domain,
    parse_expectation,
    parse_program,
    parse_state,
)
from pgcl_certify.syntax.printer import format_expr

logger = structlog.get_logger(__name__)

USAGE_ERROR = 3


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 3."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _const(text: str) -> tuple[str, Number]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got '{text}'")
    try:
        return name.strip(), parse_constant(value.strip(), name.strip())
    except PgclCertifyError as exc:
        raise argparse.ArgumentTypeError(exc.message) from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--threads", type=int, help="Worker threads for per-state checks")
    parser.add_argument(
        "--const",
        dest="constants",
        action="append",
        type=_const,
        default=[],
        metavar="NAME=VALUE",
        help="Bind a program constant (repeatable)",
    )


def _add_simulation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="RNG seed (default from settings)")
    parser.add_argument("--samples", type=int, help="Monte Carlo sample count")
    parser.add_argument("--step-cap", type=int, help="Per-run cap on guard evaluations")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="pgcl-certify",
        description="Certify upper and lower bounds on expectations of pGCL programs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    check = sub.add_parser("check", help="Apply the proof rule named in an annotation file")
    check.add_argument("annotation", type=Path)
    check.add_argument("--tol", type=float, help="Comparison tolerance for exact values")
    check.add_argument("--evidence-samples", type=int, help="Runs per state for termination evidence")
    check.add_argument("--json", dest="json_path", type=Path, help="Also write the JSON report here")
    _add_simulation(check)
    _add_common(check)

    wp = sub.add_parser("wp", help="Compute wp or ert of a program")
    wp.add_argument("program", type=Path)
    wp.add_argument("--post", required=True, help="Postexpectation (continuation for ert)")
    where = wp.add_mutually_exclusive_group()
    where.add_argument("--state", help="Single state, e.g. 'a=1, b=0'")
    where.add_argument("--domain", help="Finite domain, e.g. 'a in {0,1}; b in 0..5'")
    wp.add_argument("--kind", choices=[k.value for k in TransformerKind], default="wp")
    wp.add_argument("--symbolic", action="store_true", help="Print the loop-free transformer")
    _add_common(wp)

    simulate = sub.add_parser("simulate", help="Monte Carlo estimates by running the program")
    simulate.add_argument("program", type=Path)
    simulate.add_argument(
        "--what", choices=["post", "ert", "looping-time", "induced"], default="post"
    )
    simulate.add_argument("--state", required=True, help="Initial state, e.g. 'x=3'")
    simulate.add_argument("--f", dest="f", help="Postexpectation for post and induced")
    simulate.add_argument("--I", dest="invariant", help="Invariant for the induced process")
    simulate.add_argument("--n-index", type=int, default=0, help="Index of the induced process")
    simulate.add_argument(
        "--expect-geq",
        type=float,
        help="Also check that the mean is at least this value within 3 standard errors",
    )
    _add_simulation(simulate)
    _add_common(simulate)

    schema = sub.add_parser("schema", help="Print the JSON schema of check and ui reports")
    schema.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])

    ui = sub.add_parser("ui", help="Probe uniform integrability of an annotation's invariant")
    ui.add_argument("annotation", type=Path)
    ui.add_argument("--n-max", type=int, default=20, help="Largest iterate index")
    ui.add_argument("--tol", type=float, help="Gap tolerance")
    ui.add_argument("--json", dest="json_path", type=Path)
    _add_common(ui)
    return parser


# --- commands ----------------------------------------------------------------------


def _check_config(args: argparse.Namespace, settings: Settings, file_check=None) -> CheckConfig:
    def pick(flag: str):
        value = getattr(args, flag, None)
        if value is None and file_check is not None:
            value = getattr(file_check, flag, None)
        return value

    return CheckConfig.from_settings(
        settings,
        tol=pick("tol"),
        seed=getattr(args, "seed", None),
        samples=pick("samples"),
        evidence_samples=pick("evidence_samples"),
        step_cap=pick("step_cap"),
        threads=args.threads,
    )


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    loaded = load_annotation(args.annotation, dict(args.constants))
    check = loaded.file.check
    structlog.contextvars.bind_contextvars(rule=check.rule.value)
    cfg = _check_config(args, settings, check)
    certificate = prove(loaded.annotation_set, cfg)
    seeds = [cfg.simulation.seed]
    report = Report(
        command="check",
        annotation=loaded.raw,
        certificate=certificate,
        wall_clock_seconds=time.perf_counter() - started,
        seeds=seeds,
    )
    print(render_certificate(certificate, seeds))
    if args.json_path is not None:
        write_report(report, args.json_path)
    if check.expect is not None and check.expect is not certificate.verdict:
        logger.warning(
            "unexpected_verdict", expected=check.expect.value, verdict=certificate.verdict.value
        )
    return certificate.verdict.exit_code


def _load_program(path: Path, constants: dict[str, Number]) -> Program:
    if not path.is_file():
        raise ConfigurationError(f"Program file not found: {path}", config_key="program")
    return bind_constants(parse_program(path.read_text(encoding="utf-8")), constants)


def cmd_wp(args: argparse.Namespace, settings: Settings) -> int:
    constants = dict(args.constants)
    program = _load_program(args.program, constants)
    post = bind_constants_expr(parse_expectation(args.post), constants)
    kind = TransformerKind(args.kind)

    if args.symbolic:
        print(format_expr(collect_linear_terms(transform_loopfree(kind, program, post))))
        return 0
    if args.state is None and args.domain is None:
        raise ConfigurationError("wp needs --state or --domain unless --symbolic is given")

    states = [parse_state(args.state)] if args.state else list(parse_domain(args.domain).states())
    cfg = FixpointConfig.from_settings(settings)
    for state in states:
        result = eval_transformer(kind, program, post, state, cfg)
        flags = ["converged" if result.converged else "not converged"]
        if result.is_lower_bound_only:
            flags.append("lower bound only")
        if result.diverged:
            flags.append("diverged")
        print(f"{state}: {format_number(result.value)} ({', '.join(flags)})")
    return 0


def _first_loop(program: Program) -> While:
    if isinstance(program, While):
        return program
    loops = top_level_loops(program)
    if not loops:
        raise ConfigurationError("Program has no top-level while loop", config_key="program")
    return loops[0]


def _require(value: str | None, flag: str, what: str) -> str:
    if value is None:
        raise ConfigurationError(f"--what {what} needs {flag}", config_key=flag)
    return value


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    constants = dict(args.constants)
    program = _load_program(args.program, constants)
    state: State = parse_state(args.state)
    sim = SimulationConfig.from_settings(
        settings, seed=args.seed, samples=args.samples, step_cap=args.step_cap, threads=args.threads
    )
    structlog.contextvars.bind_contextvars(seed=sim.seed)

    def expectation(flag: str, text: str | None) -> Expr:
        return bind_constants_expr(parse_expectation(_require(text, flag, args.what)), constants)

    estimate: Estimate
    if args.what == "post":
        f = expectation("--f", args.f)
        estimate = estimate_post(
            program, f, state, sim.samples, sim.seed, sim.step_cap, threads=sim.threads
        )
    elif args.what == "ert":
        estimate = estimate_ert(program, state, sim.samples, sim.seed, sim.step_cap, sim.threads)
    elif args.what == "looping-time":
        estimate = estimate_looping_time(
            _first_loop(program), state, sim.samples, sim.seed, sim.step_cap, sim.threads
        )
    else:
        f = expectation("--f", args.f)
        invariant = expectation("--I", args.invariant)
        estimate = estimate_induced_process(
            _first_loop(program),
            f,
            invariant,
            args.n_index,
            state,
            sim.samples,
            sim.seed,
            sim.step_cap,
            sim.threads,
        )

    print(render_estimate(args.what, estimate))
    if args.expect_geq is not None:
        ok = estimate.mean >= args.expect_geq - 3 * estimate.stderr
        print(f"check: mean >= {args.expect_geq:g} - 3*stderr: {'yes' if ok else 'no'}")
        return 0 if ok else 1
    return 0


def cmd_schema(args: argparse.Namespace, settings: Settings) -> int:
    print(report_schema_json())
    return 0


def cmd_ui(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    loaded = load_annotation(args.annotation, dict(args.constants))
    cfg = _check_config(args, settings, loaded.file.check)
    result = check_uniform_integrability_empirical(loaded.annotation_set, args.n_max, cfg)
    report = Report(
        command="ui",
        annotation=loaded.raw,
        uniform_integrability=result,
        wall_clock_seconds=time.perf_counter() - started,
    )
    print(render_uniform_integrability(result))
    if args.json_path is not None:
        write_report(report, args.json_path)
    return 0 if result.converging else 1


COMMANDS = {
    "check": cmd_check,
    "wp": cmd_wp,
    "simulate": cmd_simulate,
    "schema": cmd_schema,
    "ui": cmd_ui,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(settings, level=args.log_level)
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=args.command)

    try:
        return COMMANDS[args.command](args, settings)
    except PgclCertifyError as exc:
        logger.error("command_failed", error_code=exc.error_code, error=exc.message)
        print(f"error: {exc.message}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        logger.error("command_failed", error_code="IO_ERROR", error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:
        logger.exception("command_crashed", error_type=type(exc).__name__)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE_ERROR

