"""Trajectory sampling and Monte Carlo estimators.

Runs are recorded at loop-head granularity of the outermost loop: ``heads[n]``
is the state at the n-th evaluation of its guard. The step cap bounds the
total number of guard evaluations (all loops, nested ones included); a run
that hits it is reported as not terminated.

Capped runs contribute 0 to :func:`estimate_post` and their partial cost to
:func:`estimate_ert`. Both bias estimates downwards, the safe direction
when cross-checking lower bounds.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import structlog

from pgcl_certify.core.config import Settings, get_settings
from pgcl_certify.core.exceptions import (
    ConfigurationError,
    ProbabilityRangeError,
    UndefinedArithmeticError,
)
from pgcl_certify.core.parallel import map_states
from pgcl_certify.engine.algebra import eval_arith, eval_pred, evaluate, is_integral
from pgcl_certify.models.estimates import Estimate, LoopingTimeEstimate
from pgcl_certify.simulator.rng import UniformStream, trajectory_blocks
from pgcl_certify.syntax.ast import (
    Assign,
    Expr,
    Ite,
    PChoice,
    Program,
    Seq,
    Skip,
    UnifAssign,
    While,
    top_level_loops,
)
from pgcl_certify.syntax.domain import State, format_number

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SimulationConfig:
    samples: int = 100_000
    step_cap: int = 10_000
    seed: int = 0xC0FFEE
    evidence_samples: int = 2_000
    threads: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ConfigurationError("samples must be at least 1", config_key="samples")
        if self.step_cap < 1:
            raise ConfigurationError("step_cap must be at least 1", config_key="step_cap")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative", config_key="seed")

    @classmethod
    def from_settings(cls, settings: Settings | None = None, **overrides) -> SimulationConfig:
        settings = settings or get_settings()
        values = {
            "samples": settings.SAMPLES,
            "step_cap": settings.STEP_CAP,
            "seed": settings.SEED,
            "evidence_samples": settings.EVIDENCE_SAMPLES,
            "threads": settings.THREADS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class Trajectory:
    """One sampled run.

    ``looping_time`` is the number of outer-loop iterations before the guard
    first failed, ``None`` if the run did not terminate.
    """

    heads: list[State] = field(default_factory=list)
    terminated: bool = False
    looping_time: int | None = None
    cost: Fraction = Fraction(0)
    final: State | None = None
    capped: bool = False


class _StepCapReached(Exception):
    pass


class _IterationLimitReached(Exception):
    pass


class _Executor:
    def __init__(
        self,
        stream: UniformStream,
        step_cap: int,
        outer: While | None,
        max_iterations: int | None,
    ) -> None:
        self.stream = stream
        self.step_cap = step_cap
        self.outer = outer
        self.max_iterations = max_iterations
        self.steps = 0
        self.cost = 0
        self.heads: list[State] = []

    def run(self, program: Program, state: State) -> State:
        match program:
            case Skip():
                self.cost += 1
                return state
            case Assign(var, expr):
                self.cost += 1
                return state.assign(var, eval_arith(expr, state))
            case UnifAssign(var, lo, hi):
                self.cost += 1
                low, high = eval_arith(lo, state), eval_arith(hi, state)
                if not (is_integral(low) and is_integral(high)) or high < low:
                    raise UndefinedArithmeticError(
                        f"bad uniform range {format_number(low)}..{format_number(high)}",
                        state=str(state),
                    )
                return state.assign(var, Fraction(self.stream.integer(int(low), int(high))))
            case Seq(left, right):
                return self.run(right, self.run(left, state))
            case Ite(guard, then, orelse):
                self.cost += 1
                return self.run(then if eval_pred(guard, state) else orelse, state)
            case PChoice(left, prob, right):
                self.cost += 1
                p = eval_arith(prob, state)
                if not 0 <= p <= 1:
                    raise ProbabilityRangeError(format_number(p), state=str(state))
                return self.run(left if self.stream.bernoulli(float(p)) else right, state)
            case While(guard, body):
                return self._loop(program, guard, body, state)
        raise TypeError(f"not a program: {program!r}")

    def _loop(self, loop: While, guard, body: Program, state: State) -> State:
        outer = loop is self.outer
        iterations = 0
        while True:
            self.steps += 1
            if self.steps > self.step_cap:
                raise _StepCapReached
            self.cost += 1
            if outer:
                self.heads.append(state)
            if not eval_pred(guard, state):
                return state
            if outer and self.max_iterations is not None and iterations >= self.max_iterations:
                raise _IterationLimitReached
            state = self.run(body, state)
            iterations += 1


def _outer_loop(program: Program) -> While | None:
    loops = top_level_loops(program)
    return loops[0] if loops else None


def run_once(
    program: Program,
    state: State,
    stream: UniformStream,
    step_cap: int,
    max_iterations: int | None = None,
) -> Trajectory:
    """Sample one run of ``program`` from ``state``.

    With ``max_iterations`` the outer loop is stopped after that many body
    executions; the run then counts as not terminated but not capped.
    """
    if step_cap < 1:
        raise ConfigurationError("step_cap must be at least 1", config_key="step_cap")
    executor = _Executor(stream, step_cap, _outer_loop(program), max_iterations)
    try:
        final = executor.run(program, state)
    except _StepCapReached:
        return Trajectory(executor.heads, False, None, Fraction(executor.cost), None, True)
    except _IterationLimitReached:
        return Trajectory(executor.heads, False, None, Fraction(executor.cost), None, False)
    looping_time = len(executor.heads) - 1 if executor.heads else 0
    return Trajectory(executor.heads, True, looping_time, Fraction(executor.cost), final, False)


Sample = Callable[[Trajectory], float | None]


def _sample(
    program: Program,
    state: State,
    n: int,
    seed: int,
    step_cap: int,
    observe: Sample,
    max_iterations: int | None = None,
    threads: int = 1,
) -> tuple[np.ndarray, int]:
    """Run ``n`` trajectories; return observed values and the number of non-terminated runs.

    ``observe`` returning ``None`` drops the run from the values.
    """
    if n < 1:
        raise ConfigurationError("number of samples must be at least 1", config_key="samples")

    def run_block(block: tuple[int, range, UniformStream]) -> tuple[list[float], int]:
        _, indices, stream = block
        values: list[float] = []
        nonterminated = 0
        for _ in indices:
            trajectory = run_once(program, state, stream, step_cap, max_iterations)
            if not trajectory.terminated:
                nonterminated += 1
            value = observe(trajectory)
            if value is not None:
                values.append(value)
        return values, nonterminated

    results = map_states(run_block, list(trajectory_blocks(seed, n)), threads)
    values = np.fromiter(
        (v for block_values, _ in results for v in block_values), dtype=np.float64
    )
    return values, sum(count for _, count in results)


def _stats(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return math.inf, 0.0
    mean = float(np.mean(values))
    if values.size < 2 or not math.isfinite(mean):
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def _estimate(values: np.ndarray, n: int, nonterminated: int, seed: int, step_cap: int) -> Estimate:
    mean, stderr = _stats(values)
    return Estimate(
        mean=mean,
        stderr=stderr,
        n_samples=n,
        nonterminated_fraction=nonterminated / n,
        seed=seed,
        step_cap=step_cap,
    )


def estimate_post(
    program: Program,
    f: Expr,
    state: State,
    n: int,
    seed: int,
    step_cap: int,
    threads: int = 1,
) -> Estimate:
    """Mean of ``f`` at the final state; non-terminated runs contribute 0."""

    def observe(trajectory: Trajectory) -> float:
        if trajectory.final is None:
            return 0.0
        return float(evaluate(f, trajectory.final))

    values, nonterminated = _sample(program, state, n, seed, step_cap, observe, threads=threads)
    estimate = _estimate(values, n, nonterminated, seed, step_cap)
    logger.debug("simulation_done", what="post", state=str(state), mean=estimate.mean, n=n)
    return estimate


def estimate_ert(
    program: Program,
    state: State,
    n: int,
    seed: int,
    step_cap: int,
    threads: int = 1,
) -> Estimate:
    """Mean accumulated cost; capped runs contribute the cost spent so far."""
    values, nonterminated = _sample(
        program, state, n, seed, step_cap, lambda t: float(t.cost), threads=threads
    )
    estimate = _estimate(values, n, nonterminated, seed, step_cap)
    logger.debug("simulation_done", what="ert", state=str(state), mean=estimate.mean, n=n)
    return estimate


def estimate_looping_time(
    loop: While,
    state: State,
    n: int,
    seed: int,
    step_cap: int,
    threads: int = 1,
) -> LoopingTimeEstimate:
    """Looping-time statistics over the terminating runs.

    The mean is infinite when no run terminated.
    """
    values, nonterminated = _sample(
        loop, state, n, seed, step_cap, lambda t: t.looping_time, threads=threads
    )
    mean, stderr = _stats(values)
    estimate = LoopingTimeEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=n,
        nonterminated_fraction=nonterminated / n,
        seed=seed,
        step_cap=step_cap,
        max_observed=int(values.max()) if values.size else None,
        terminated_samples=int(values.size),
    )
    logger.debug(
        "simulation_done",
        what="looping-time",
        state=str(state),
        mean=estimate.mean,
        nonterminated=estimate.nonterminated_fraction,
    )
    return estimate


def estimate_induced_process(
    loop: While,
    f: Expr,
    invariant: Expr,
    n_index: int,
    state: State,
    n_samples: int,
    seed: int,
    step_cap: int = 10_000,
    threads: int = 1,
) -> Estimate:
    """Mean of ``X_n``: ``f`` at exit if the loop stopped within ``n`` iterations,
    otherwise ``invariant`` at the head state after ``n + 1`` iterations.

    Its expectation equals the ``n + 1``-fold characteristic-function image of
    ``invariant`` at ``state``.
    """
    if n_index < 0:
        raise ConfigurationError("n_index must be nonnegative", config_key="n_index")

    def observe(trajectory: Trajectory) -> float:
        if trajectory.terminated and trajectory.looping_time <= n_index:
            return float(evaluate(f, trajectory.final))
        if len(trajectory.heads) >= n_index + 2:
            return float(evaluate(invariant, trajectory.heads[n_index + 1]))
        # capped inside the body before reaching the (n+1)-th head
        return 0.0

    values, nonterminated = _sample(
        loop, state, n_samples, seed, step_cap, observe, max_iterations=n_index + 1, threads=threads
    )
    estimate = _estimate(values, n_samples, nonterminated, seed, step_cap)
    logger.debug(
        "simulation_done", what="induced", n_index=n_index, state=str(state), mean=estimate.mean
    )
    return estimate


def termination_frequency(
    program: Program, state: State, n: int, seed: int, step_cap: int, threads: int = 1
) -> float:
    """Fraction of sampled runs that terminate within the step cap."""
    _, nonterminated = _sample(program, state, n, seed, step_cap, lambda t: None, threads=threads)
    return 1.0 - nonterminated / n
