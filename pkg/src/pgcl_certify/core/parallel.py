"""Order-preserving fan-out of per-state work."""

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import structlog

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_states(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply ``fn`` to every item, preserving input order.

    With ``threads > 1`` the calls run on a thread pool. Callers must pass
    functions that are pure per item.
    """
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]

    logger.debug("map_states_parallel", items=len(items), threads=threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
