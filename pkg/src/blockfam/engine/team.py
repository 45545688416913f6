"""Minimal deterministic worker team for the engine's outer loops.

The contract mirrors a thread communicator at desk scale: a team of `ways`
workers receives a statically chunked list of work items (contiguous,
deterministic split), every worker touches a disjoint output partition, and
`run` is a barrier - it returns only when all workers finished and re-raises
the first worker exception. ways=1 executes inline with no pool.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

__all__ = ["WorkerTeam", "chunk_evenly"]


def chunk_evenly(items: Sequence[T], ways: int) -> list[list[T]]:
    """Split items into at most `ways` contiguous chunks of near-equal size."""
    n = len(items)
    ways = max(1, min(ways, n)) if n else 1
    base, extra = divmod(n, ways)
    chunks: list[list[T]] = []
    at = 0
    for w in range(ways):
        size = base + (1 if w < extra else 0)
        chunks.append(list(items[at : at + size]))
        at += size
    return [c for c in chunks if c]


class WorkerTeam:
    def __init__(self, ways: int):
        if ways < 1:
            raise ValueError(f"ways must be >= 1, got {ways}")
        self.ways = ways
        self._pool = ThreadPoolExecutor(max_workers=ways) if ways > 1 else None

    def run(self, tasks: Sequence[Callable[[], None]]) -> None:
        """Execute tasks and wait for all of them (barrier)."""
        if self._pool is None or len(tasks) <= 1:
            for task in tasks:
                task()
            return
        futures = [self._pool.submit(task) for task in tasks]
        for fut in futures:
            fut.result()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self) -> "WorkerTeam":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
