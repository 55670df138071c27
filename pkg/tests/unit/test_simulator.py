"""Tests for trajectory sampling and the Monte Carlo estimators."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from pgcl_certify.core.exceptions import ConfigurationError
from pgcl_certify.engine.algebra import bind_constants, evaluate
from pgcl_certify.engine.fixpoint import eval_transformer
from pgcl_certify.engine.transformers import iterate_char
from pgcl_certify.models.certificates import TransformerKind
from pgcl_certify.simulator.rng import BLOCK_SIZE, block_stream, trajectory_blocks
from pgcl_certify.simulator.sampler import (
    SimulationConfig,
    estimate_ert,
    estimate_induced_process,
    estimate_looping_time,
    estimate_post,
    run_once,
    termination_frequency,
)
from pgcl_certify.syntax.ast import Num, Var
from pgcl_certify.syntax.domain import State
from pgcl_certify.syntax.parser import parse_expectation, parse_program
from tests.conftest import CORPUS_DIR

SEED = 20240601
N = 100_000
# acceptance band in standard errors for every seeded estimate below
SIGMAS = 4


def corpus_program(name: str, **constants):
    program = parse_program((CORPUS_DIR / name).read_text(encoding="utf-8"))
    return bind_constants(program, {k: Fraction(v) for k, v in constants.items()})


class TestStreams:
    """Seeded per-block random streams."""

    def test_same_block_same_draws(self) -> None:
        a, b = block_stream(7, 3), block_stream(7, 3)
        assert [a.random() for _ in range(10)] == [b.random() for _ in range(10)]

    def test_blocks_differ(self) -> None:
        a, b = block_stream(7, 0), block_stream(7, 1)
        assert [a.random() for _ in range(5)] != [b.random() for _ in range(5)]

    def test_integer_range(self) -> None:
        stream = block_stream(1, 0)
        draws = {stream.integer(1, 3) for _ in range(500)}
        assert draws == {1, 2, 3}

    def test_buffer_refill(self) -> None:
        stream = block_stream(1, 0)
        values = [stream.random() for _ in range(10_000)]
        assert all(0.0 <= v < 1.0 for v in values)

    def test_blocks_cover_all_trajectories(self) -> None:
        blocks = list(trajectory_blocks(0, 2 * BLOCK_SIZE + 5))
        assert [b for b, _, _ in blocks] == [0, 1, 2]
        assert sum(len(indices) for _, indices, _ in blocks) == 2 * BLOCK_SIZE + 5


class TestRunOnce:
    """Single sampled runs."""

    def test_skip(self) -> None:
        trajectory = run_once(parse_program("skip"), State(x=0), block_stream(0, 0), 10)
        assert trajectory.terminated
        assert trajectory.cost == 1
        assert trajectory.looping_time == 0
        assert trajectory.final == State(x=0)

    def test_guard_false_loop(self) -> None:
        trajectory = run_once(corpus_program("geo.pgcl"), State(a=0, b=4), block_stream(0, 0), 10)
        assert trajectory.terminated
        assert trajectory.looping_time == 0
        assert trajectory.heads == [State(a=0, b=4)]
        assert trajectory.cost == 1

    def test_step_cap(self) -> None:
        trajectory = run_once(corpus_program("diverge.pgcl"), State(x=0), block_stream(0, 0), 50)
        assert trajectory.capped
        assert not trajectory.terminated
        assert trajectory.looping_time is None
        assert trajectory.final is None

    def test_heads_are_outer_loop_states(self) -> None:
        trajectory = run_once(corpus_program("geo.pgcl"), State(a=1, b=0), block_stream(3, 0), 1_000)
        assert trajectory.terminated
        assert trajectory.heads[0] == State(a=1, b=0)
        assert trajectory.heads[-1]["a"] == 0
        assert trajectory.looping_time == len(trajectory.heads) - 1

    def test_invalid_step_cap(self) -> None:
        with pytest.raises(ConfigurationError):
            run_once(parse_program("skip"), State(), block_stream(0, 0), 0)


@pytest.mark.statistical
@pytest.mark.slow
class TestEstimators:
    """Estimates against known closed forms, within SIGMAS standard errors."""

    def test_post_geometric(self) -> None:
        estimate = estimate_post(corpus_program("geo.pgcl"), Var("b"), State(a=1, b=0), N, SEED, 10_000)
        assert estimate.within(1.0, sigmas=SIGMAS)
        assert estimate.nonterminated_fraction == 0.0
        assert estimate.n_samples == N

    def test_post_counter_loop(self) -> None:
        estimate = estimate_post(corpus_program("cex.pgcl"), Var("b"), State(a=1, b=7, k=0), N, SEED, 10_000)
        assert estimate.within(8.0, sigmas=SIGMAS)

    def test_same_seed_same_estimate(self) -> None:
        program = corpus_program("geo.pgcl")
        first = estimate_post(program, Var("b"), State(a=1, b=0), 1_500, 99, 10_000)
        second = estimate_post(program, Var("b"), State(a=1, b=0), 1_500, 99, 10_000)
        assert first.mean == second.mean
        assert first.stderr == second.stderr

    def test_threads_do_not_change_results(self) -> None:
        program = corpus_program("ert_example.pgcl")
        single = estimate_ert(program, State(b=0), 2_500, SEED, 10_000, threads=1)
        pooled = estimate_ert(program, State(b=0), 2_500, SEED, 10_000, threads=3)
        assert single.mean == pooled.mean

    def test_looping_time_counter_loop(self) -> None:
        estimate = estimate_looping_time(corpus_program("cex.pgcl"), State(a=1, b=0, k=0), N, SEED, 10_000)
        assert estimate.within(2.0, sigmas=SIGMAS)
        assert estimate.terminated_samples == N
        assert estimate.max_observed >= 1

    def test_looping_time_walk(self) -> None:
        estimate = estimate_looping_time(corpus_program("neg.pgcl"), State(x=3, k=0), N, SEED, 10_000)
        assert estimate.within(6.0, sigmas=SIGMAS)

    def test_looping_time_guard_false(self) -> None:
        estimate = estimate_looping_time(corpus_program("geo.pgcl"), State(a=0, b=0), 200, SEED, 10_000)
        assert estimate.mean == 0.0
        assert estimate.max_observed == 0

    def test_looping_time_never_terminates(self) -> None:
        estimate = estimate_looping_time(corpus_program("diverge.pgcl"), State(x=0), 20, SEED, 100)
        assert math.isinf(estimate.mean)
        assert estimate.nonterminated_fraction == 1.0
        assert estimate.max_observed is None
        assert estimate.terminated_samples == 0

    def test_runtime(self) -> None:
        program = corpus_program("ert_example.pgcl")
        deterministic = estimate_ert(program, State(b=5), 500, SEED, 10_000)
        assert deterministic.mean == 4.0
        assert deterministic.stderr == 0.0
        mixed = estimate_ert(program, State(b=0), N, SEED, 10_000)
        assert mixed.within(4.8, sigmas=SIGMAS)

    def test_runtime_counts_capped_runs(self) -> None:
        estimate = estimate_ert(corpus_program("diverge.pgcl"), State(x=0), 10, SEED, 25)
        assert estimate.nonterminated_fraction == 1.0
        assert estimate.mean > 0

    @pytest.mark.parametrize("n_index", [0, 1, 2, 3])
    @pytest.mark.parametrize(
        ("name", "invariant", "state"),
        [
            ("geo.pgcl", "0", State(a=1, b=0)),
            ("geo.pgcl", "b + 2*[a != 0]", State(a=1, b=0)),
            ("cex.pgcl", "b + [a != 0]", State(a=1, b=0, k=0)),
            ("cex.pgcl", "k", State(a=1, b=2, k=0)),
        ],
    )
    def test_induced_process_matches_iterate(
        self, name: str, invariant: str, state: State, n_index: int
    ) -> None:
        loop = corpus_program(name)
        f, i = Var("b"), parse_expectation(invariant)
        expected = evaluate(iterate_char(TransformerKind.WP, loop, f, i, n_index + 1), state)
        estimate = estimate_induced_process(loop, f, i, n_index, state, N, SEED + n_index)
        assert estimate.within(float(expected), sigmas=SIGMAS)

    @pytest.mark.parametrize(
        ("name", "post", "state"),
        [
            ("geo.pgcl", "b", State(a=1, b=0)),
            ("cex.pgcl", "b + k", State(a=1, b=3, k=0)),
            ("neg.pgcl", "k", State(x=2, k=0)),
            ("neg.pgcl", "[k = 0]", State(x=3, k=0)),
            ("ert_example.pgcl", "b", State(b=0)),
        ],
    )
    def test_post_matches_value_iteration(self, name: str, post: str, state: State) -> None:
        program = corpus_program(name)
        f = parse_expectation(post)
        exact = eval_transformer(TransformerKind.WP, program, f, state)
        assert exact.converged
        estimate = estimate_post(program, f, state, N, SEED, 10_000)
        assert estimate.within(float(exact.value), sigmas=SIGMAS)

    @pytest.mark.parametrize(
        ("name", "state"),
        [("geo.pgcl", State(a=1, b=0)), ("neg.pgcl", State(x=2, k=0))],
    )
    def test_runtime_matches_value_iteration(self, name: str, state: State) -> None:
        program = corpus_program(name)
        exact = eval_transformer(TransformerKind.ERT, program, Num(Fraction(0)), state)
        assert exact.converged
        estimate = estimate_ert(program, state, N, SEED, 10_000)
        assert estimate.within(float(exact.value), sigmas=SIGMAS)

    def test_induced_process_rejects_negative_index(self) -> None:
        with pytest.raises(ConfigurationError):
            estimate_induced_process(
                corpus_program("geo.pgcl"), Var("b"), Var("b"), -1, State(a=1, b=0), 10, SEED
            )

    def test_termination_frequency(self) -> None:
        assert termination_frequency(corpus_program("geo.pgcl"), State(a=1, b=0), 300, SEED, 10_000) == 1.0
        assert termination_frequency(corpus_program("diverge.pgcl"), State(x=0), 20, SEED, 100) == 0.0


class TestSimulationConfig:
    """Sampling budgets from settings."""

    def test_rejects_bad_budgets(self) -> None:
        with pytest.raises(ConfigurationError):
            SimulationConfig(samples=0)
        with pytest.raises(ConfigurationError):
            SimulationConfig(step_cap=0)
        with pytest.raises(ConfigurationError):
            SimulationConfig(seed=-1)

    def test_overrides_ignore_none(self, test_settings) -> None:
        config = SimulationConfig.from_settings(test_settings, samples=None, seed=5)
        assert config.samples == test_settings.SAMPLES
        assert config.seed == 5
