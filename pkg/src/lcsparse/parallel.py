"""Deterministic index-parallel execution.

Every campaign in this package is a pure function of a trial index (each
index derives its own RNG sub-stream), so parallelism is just a matter of
mapping over indices and reassembling results in index order.  The worker
count can therefore never change a result, only its wall-clock time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

T = TypeVar("T")

#: Environment variable consulted for the default worker count.
WORKERS_ENV_VAR = "LCSPARSE_WORKERS"


def default_workers() -> int:
    """Worker count from the environment, falling back to 1."""
    raw = os.environ.get(WORKERS_ENV_VAR, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def run_indexed(count: int, fn: Callable[[int], T], workers: int = 1) -> List[T]:
    """Evaluate ``fn(0..count-1)`` and return results in index order.

    With ``workers <= 1`` this is a plain loop.  Otherwise the indices are
    dispatched to a thread pool (the heavy lifting inside each call is
    numpy, which releases the interpreter lock) and the results are merged
    back by index, so output order is independent of scheduling.
    """
    if count < 0:
        raise ValueError("`count` must be non-negative")
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))
