"""Reproducible per-trajectory random streams.

Trajectory ``i`` of a run seeded with ``seed`` always draws from the same
stream: trajectories are grouped into fixed-size blocks and block ``b``
gets the PCG64 generator of ``SeedSequence(seed, spawn_key=(b,))``. A block
is consumed in trajectory order, so results do not depend on how blocks
are scheduled across threads.
"""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np

BLOCK_SIZE = 1_000
BUFFER_SIZE = 4_096


class UniformStream:
    """Buffered uniform draws in ``[0, 1)`` from one numpy generator."""

    __slots__ = ("_generator", "_buffer", "_index")

    def __init__(self, generator: np.random.Generator) -> None:
        self._generator = generator
        self._buffer = generator.random(BUFFER_SIZE)
        self._index = 0

    def random(self) -> float:
        if self._index == BUFFER_SIZE:
            self._buffer = self._generator.random(BUFFER_SIZE)
            self._index = 0
        value = self._buffer[self._index]
        self._index += 1
        return float(value)

    def bernoulli(self, p: float) -> bool:
        """True with probability ``p``."""
        return self.random() < p

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in ``low..high`` inclusive."""
        span = high - low + 1
        return low + min(int(self.random() * span), span - 1)


def block_stream(seed: int, block: int) -> UniformStream:
    sequence = np.random.SeedSequence(seed, spawn_key=(block,))
    return UniformStream(np.random.Generator(np.random.PCG64(sequence)))


def trajectory_blocks(seed: int, n: int) -> Iterator[tuple[int, range, UniformStream]]:
    """Yield ``(block, trajectory indices, stream)`` covering ``0..n-1``."""
    for block, start in enumerate(range(0, n, BLOCK_SIZE)):
        yield block, range(start, min(start + BLOCK_SIZE, n)), block_stream(seed, block)
