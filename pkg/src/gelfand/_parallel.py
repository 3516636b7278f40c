"""Order-preserving map over a capped thread pool (GELFAND_THREADS)."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Workers allowed by GELFAND_THREADS (default 1: the numerics hold the GIL)."""
    raw = os.environ.get("GELFAND_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GELFAND_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"GELFAND_THREADS must be a positive integer, got {raw!r}")
    return n


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
