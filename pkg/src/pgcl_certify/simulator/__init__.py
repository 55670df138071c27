"""Operational semantics by sampling: trajectories and Monte Carlo estimators."""

from pgcl_certify.simulator.rng import UniformStream, block_stream
from pgcl_certify.simulator.sampler import (
    SimulationConfig,
    Trajectory,
    estimate_ert,
    estimate_induced_process,
    estimate_looping_time,
    estimate_post,
    run_once,
    termination_frequency,
)

__all__ = [
    "UniformStream",
    "block_stream",
    "SimulationConfig",
    "Trajectory",
    "run_once",
    "estimate_post",
    "estimate_ert",
    "estimate_looping_time",
    "estimate_induced_process",
    "termination_frequency",
]
