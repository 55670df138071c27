"""Numeric wp / ert values by Kleene iteration from 0.

The iteration is realised as forward propagation of the loop-head
sub-distribution: after ``n`` rounds the mass that has left the loop,
weighted by ``f``, plus the cost spent so far, is exactly ``Phi^n(0)(s)``.
Only states reachable from the query state are ever touched, so loops
with unbounded reachable state sets (e.g. a counter that grows forever
with vanishing probability) still converge.

Stopping rules, checked after every round:

* no mass left in the loop, or at most ``abs_tol`` of it: converged;
* the in-loop distribution repeats one seen since mass last left the loop
  (a fixed or periodic frontier, period up to ``CYCLE_WINDOW``): converged,
  the remaining mass never terminates (ert: infinite cost);
* ``max_iters`` rounds: unconverged, value is a lower bound only;
* ert cost above ``divergence_threshold``: reported as infinity.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import structlog
from cachetools import LRUCache

from pgcl_certify.core.config import Settings, get_settings
from pgcl_certify.core.exceptions import (
    ConfigurationError,
    ProbabilityRangeError,
    StateSpaceExplosionError,
    UndefinedArithmeticError,
)
from pgcl_certify.engine.algebra import (
    INF,
    ONE,
    ZERO,
    eval_arith,
    eval_pred,
    evaluate,
    ext_add,
    ext_mul,
    is_integral,
)
from pgcl_certify.models.certificates import TransformerKind
from pgcl_certify.syntax.ast import (
    Assign,
    Expr,
    Ite,
    Number,
    PChoice,
    Program,
    Seq,
    Skip,
    UnifAssign,
    While,
)
from pgcl_certify.syntax.domain import State, format_number

logger = structlog.get_logger(__name__)

CYCLE_WINDOW = 256


@dataclass(frozen=True)
class FixpointConfig:
    """Knobs of the fixed-point engine.

    ``truncation`` maps a variable to inclusive ``(lo, hi)`` bounds; a
    loop-head state with the guard true and a variable outside its bounds
    is absorbed with value 0 (wp) and no further cost (ert).
    """

    abs_tol: float = 1e-9
    max_iters: int = 1_000_000
    max_states: int = 200_000
    divergence_threshold: float = 1e15
    exact_loops: bool = False
    truncation: tuple[tuple[str, Number | None, Number | None], ...] = ()

    def __post_init__(self) -> None:
        if self.abs_tol <= 0:
            raise ConfigurationError("abs_tol must be positive", config_key="abs_tol")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be at least 1", config_key="max_iters")
        if self.max_states < 1:
            raise ConfigurationError("max_states must be at least 1", config_key="max_states")

    @classmethod
    def from_settings(cls, settings: Settings | None = None, **overrides) -> FixpointConfig:
        settings = settings or get_settings()
        values = {
            "abs_tol": settings.FIXPOINT_ABS_TOL,
            "max_iters": settings.FIXPOINT_MAX_ITERS,
            "max_states": settings.FIXPOINT_MAX_STATES,
            "divergence_threshold": settings.DIVERGENCE_THRESHOLD,
            "exact_loops": settings.FIXPOINT_EXACT_LOOPS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_truncation(
        self, bounds: Mapping[str, tuple[Number | None, Number | None]] | None
    ) -> FixpointConfig:
        items = tuple((name, lo, hi) for name, (lo, hi) in sorted((bounds or {}).items()))
        return dataclasses.replace(self, truncation=items)

    def without_truncation(self) -> FixpointConfig:
        return dataclasses.replace(self, truncation=())

    def is_truncated(self, state: Mapping[str, Number]) -> bool:
        for name, lo, hi in self.truncation:
            value = state.get(name)
            if value is None:
                continue
            if (lo is not None and value < lo) or (hi is not None and value > hi):
                return True
        return False


@dataclass(frozen=True)
class BoundedValue:
    """A transformer value with its convergence status."""

    value: Number
    converged: bool
    iterations: int
    is_lower_bound_only: bool
    diverged: bool = False
    trace: tuple[Number, ...] = ()


@dataclass
class Outcome:
    """Final-state sub-distribution of a program run plus its expected cost."""

    dist: dict[State, Number] = field(default_factory=dict)
    cost: Number = ZERO

    @property
    def mass(self) -> Number:
        return sum(self.dist.values(), ZERO)


@dataclass
class _LoopRun:
    exits: dict[State, Number]
    frontier: dict[State, Number]
    cost: Number
    iterations: int


RoundObserver = Callable[[int, dict[State, Number], dict[State, Number], Number], None]


def _accumulate(target: dict[State, Number], state: State, mass: Number) -> None:
    target[state] = target.get(state, ZERO) + mass


class FixpointEngine:
    """Per-call memoising evaluator of program outcomes.

    Outcome tables are keyed by node identity, so one engine must only be
    used while the analysed program objects are alive.
    """

    def __init__(self, cfg: FixpointConfig | None = None, kind: TransformerKind = TransformerKind.WP):
        self.cfg = cfg or FixpointConfig.from_settings()
        self.kind = kind
        self._body_cache: LRUCache = LRUCache(maxsize=self.cfg.max_states)
        self._loop_cache: LRUCache = LRUCache(maxsize=self.cfg.max_states)
        self.truncated = False
        self.unconverged = False
        self.diverged = False
        self.max_iterations = 0

    # --- program outcomes -------------------------------------------------

    def outcome(self, program: Program, state: State) -> Outcome:
        """Final-state sub-distribution and expected cost of running ``program`` from ``state``."""
        match program:
            case Skip():
                return Outcome({state: ONE}, ONE)
            case Assign(var, expr):
                return Outcome({state.assign(var, eval_arith(expr, state)): ONE}, ONE)
            case UnifAssign(var, lo, hi):
                return self._uniform(var, lo, hi, state)
            case Seq(left, right):
                return self._sequence(left, right, state)
            case Ite(guard, then, orelse):
                branch = then if eval_pred(guard, state) else orelse
                inner = self.outcome(branch, state)
                return Outcome(inner.dist, ext_add(ONE, inner.cost))
            case PChoice(left, prob, right):
                return self._choice(left, prob, right, state)
            case While():
                return self._loop_outcome(program, state)
        raise TypeError(f"not a program: {program!r}")

    def _uniform(self, var: str, lo: Expr, hi: Expr, state: State) -> Outcome:
        lo_value, hi_value = eval_arith(lo, state), eval_arith(hi, state)
        if not (is_integral(lo_value) and is_integral(hi_value)):
            raise UndefinedArithmeticError("unif() bounds must be integers", state=str(state))
        low, high = int(lo_value), int(hi_value)
        if high < low:
            raise UndefinedArithmeticError(f"empty uniform range {low}..{high}", state=str(state))
        weight = Fraction(1, high - low + 1)
        return Outcome({state.assign(var, Fraction(v)): weight for v in range(low, high + 1)}, ONE)

    def _sequence(self, left: Program, right: Program, state: State) -> Outcome:
        first = self.outcome(left, state)
        dist: dict[State, Number] = {}
        cost = first.cost
        for middle, mass in first.dist.items():
            second = self.outcome(right, middle)
            cost = ext_add(cost, ext_mul(mass, second.cost))
            for final, weight in second.dist.items():
                _accumulate(dist, final, mass * weight)
        return Outcome(dist, cost)

    def _choice(self, left: Program, prob: Expr, right: Program, state: State) -> Outcome:
        p = eval_arith(prob, state)
        if not 0 <= p <= 1:
            raise ProbabilityRangeError(format_number(p), state=str(state))
        dist: dict[State, Number] = {}
        cost: Number = ZERO
        for branch, weight in ((left, p), (right, 1 - p)):
            if weight == 0:
                continue
            inner = self.outcome(branch, state)
            cost = ext_add(cost, ext_mul(weight, inner.cost))
            for final, mass in inner.dist.items():
                _accumulate(dist, final, weight * mass)
        return Outcome(dist, ext_add(ONE, cost))

    def body_outcome(self, body: Program, state: State) -> Outcome:
        key = (id(body), state)
        cached = self._body_cache.get(key)
        if cached is None:
            cached = self.outcome(body, state)
            self._body_cache[key] = cached
        return cached

    # --- loops ------------------------------------------------------------

    def _loop_outcome(self, loop: While, state: State) -> Outcome:
        key = (id(loop), state)
        cached = self._loop_cache.get(key)
        if cached is None:
            run = self.run_loop(loop, state)
            cached = Outcome(run.exits, run.cost)
            self._loop_cache[key] = cached
        return cached

    def run_loop(
        self,
        loop: While,
        start: State,
        rounds: int | None = None,
        observer: RoundObserver | None = None,
    ) -> _LoopRun:
        """Propagate loop-head mass from ``start``.

        With ``rounds`` set, exactly that many rounds are run (no
        convergence test); otherwise the stopping rules of the module apply.
        """
        cfg = self.cfg
        exact = cfg.exact_loops or rounds is not None
        unit: Number = ONE if exact else 1.0
        frontier: dict[State, Number] = {start: unit}
        exits: dict[State, Number] = {}
        cost: Number = ZERO if exact else 0.0
        iterations = 0
        history: set[frozenset[tuple[State, Number]]] = {frozenset(frontier.items())}

        while frontier:
            if rounds is not None and iterations >= rounds:
                break
            if rounds is None and iterations >= cfg.max_iters:
                self.unconverged = True
                logger.warning("fixpoint_max_iters", iterations=iterations, start=str(start))
                break
            iterations += 1
            new_exits: dict[State, Number] = {}
            successors: dict[State, Number] = {}
            for current, mass in frontier.items():
                cost = ext_add(cost, mass)  # guard evaluation
                if not eval_pred(loop.guard, current):
                    _accumulate(new_exits, current, mass)
                    continue
                if cfg.truncation and cfg.is_truncated(current):
                    self.truncated = True
                    continue
                body = self.body_outcome(loop.body, current)
                cost = ext_add(cost, ext_mul(mass, body.cost))
                for successor, weight in body.dist.items():
                    _accumulate(successors, successor, mass * weight)

            if len(successors) > cfg.max_states:
                raise StateSpaceExplosionError(len(successors), cfg.max_states)
            for final, mass in new_exits.items():
                _accumulate(exits, final, mass)
            if observer is not None:
                observer(iterations, new_exits, successors, cost)
            if rounds is not None:
                frontier = successors
                continue

            if new_exits:
                history.clear()
            else:
                snapshot = frozenset(successors.items())
                if snapshot in history:
                    # the same mass circulates forever
                    if self.kind is TransformerKind.ERT:
                        cost = INF
                        self.diverged = True
                    frontier = successors
                    logger.debug("fixpoint_stationary", iterations=iterations, start=str(start))
                    break
                if len(history) >= CYCLE_WINDOW:
                    history.clear()
                history.add(snapshot)
            if self.kind is TransformerKind.ERT and cost > cfg.divergence_threshold:
                cost = INF
                self.diverged = True
                logger.info("fixpoint_diverged", iterations=iterations, start=str(start))
                break
            if sum(successors.values()) <= cfg.abs_tol:
                frontier = successors
                break
            frontier = successors

        self.max_iterations = max(self.max_iterations, iterations)
        return _LoopRun(exits, frontier, cost, iterations)

    # --- characteristic function, numerically -------------------------------

    def iterate(self, loop: While, state: State, f: Expr, x: Expr, n_max: int) -> list[Number]:
        """``Phi^n(x)(state)`` for ``n = 0..n_max`` (nested loops allowed in the body)."""
        exited: list[Number] = [ZERO]
        values: list[Number] = [evaluate(x, state)]

        def observe(n: int, new_exits, successors, cost) -> None:
            for final, mass in new_exits.items():
                exited[0] = ext_add(exited[0], ext_mul(mass, evaluate(f, final)))
            pending: Number = ZERO
            for current, mass in successors.items():
                pending = ext_add(pending, ext_mul(mass, evaluate(x, current)))
            value = ext_add(exited[0], pending)
            if self.kind is TransformerKind.ERT:
                value = ext_add(value, cost)
            values.append(value)

        self.run_loop(loop, state, rounds=n_max, observer=observe)
        while len(values) < n_max + 1:
            values.append(values[-1])
        return values

    def char_value(self, loop: While, state: State, f: Expr, x: Expr) -> Number:
        """``Phi(x)(state)`` for the loop's wp or ert characteristic function."""
        return self.iterate(loop, state, f, x, 1)[1]

    def value(self, program: Program, f: Expr, state: State) -> Number:
        result = self.outcome(program, state)
        total: Number = ZERO
        for final, mass in result.dist.items():
            total = ext_add(total, ext_mul(mass, evaluate(f, final)))
        if self.kind is TransformerKind.ERT:
            total = ext_add(total, result.cost)
        return total


def outcome(program: Program, state: State, cfg: FixpointConfig | None = None) -> Outcome:
    """Final-state sub-distribution and expected cost of ``program`` from ``state``."""
    return FixpointEngine(cfg).outcome(program, state)


def eval_transformer(
    kind: TransformerKind,
    program: Program,
    f: Expr,
    state: State,
    cfg: FixpointConfig | None = None,
    record_trace: bool = False,
) -> BoundedValue:
    """Value of wp/ert of ``program`` for ``f`` at ``state`` by Kleene iteration from 0.

    With ``record_trace`` and a top-level loop, ``trace[n-1]`` is
    ``Phi^n(0)(state)``; the trace is nondecreasing.
    """
    engine = FixpointEngine(cfg, kind)
    trace: list[Number] = []

    if record_trace and isinstance(program, While):
        exited: list[Number] = [ZERO]

        def observe(n: int, new_exits, successors, cost) -> None:
            for final, mass in new_exits.items():
                exited[0] = ext_add(exited[0], ext_mul(mass, evaluate(f, final)))
            value = ext_add(exited[0], cost) if kind is TransformerKind.ERT else exited[0]
            if trace and value < trace[-1]:
                raise AssertionError("Kleene iterates decreased")
            trace.append(value)

        run = engine.run_loop(program, state, observer=observe)
        engine._loop_cache[(id(program), state)] = Outcome(run.exits, run.cost)

    value = engine.value(program, f, state)
    if engine.diverged:
        value = INF
    result = BoundedValue(
        value=value,
        converged=not engine.unconverged and not engine.diverged,
        iterations=engine.max_iterations,
        is_lower_bound_only=engine.truncated or engine.unconverged,
        diverged=engine.diverged,
        trace=tuple(trace),
    )
    logger.debug(
        "fixpoint_evaluated",
        kind=kind.value,
        state=str(state),
        value=format_number(value),
        converged=result.converged,
        iterations=result.iterations,
    )
    return result
