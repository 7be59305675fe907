"""Worker-pool contract: N independent workers, shared read-only inputs,
coordinator-only writes.

The pool is process-or-thread agnostic by contract; this implementation
forks worker processes (cheap on Linux) and falls back to plain in-process
mapping for a single worker. Large read-only inputs are published to the
workers through fork-time memory sharing rather than pickling: `map` takes
a `shared` object that is staged in a module global just before the fork,
so every child sees it at zero copy cost and only the small per-task items
and results cross process boundaries. Results always come back in task
order, so coordinator-side reductions are deterministic regardless of
worker count or scheduling.
"""
from __future__ import annotations

import multiprocessing as mp

from .errors import InvalidParameterError

_FORK = mp.get_context("fork")

_SHARED = None


def _call_with_shared(args):
    fn, item = args
    return fn(_SHARED, item)


class _Session:
    """A forked pool holding one shared input for several map phases.

    The pool forks at session start, after the shared object is staged, so
    every phase sees it without serialization. Each ``map`` call is a
    barrier: it returns only when all tasks of the phase finished.
    """

    def __init__(self, workers, shared):
        global _SHARED
        self.shared = shared
        self.pool = None
        if workers > 1:
            _SHARED = shared
            try:
                self.pool = _FORK.Pool(processes=workers)
            finally:
                _SHARED = None

    def map(self, fn, items):
        items = list(items)
        if self.pool is None or len(items) <= 1:
            return [fn(self.shared, it) for it in items]
        chunk = max(1, len(items) // (self.pool._processes * 4))  # noqa: SLF001
        return self.pool.map(_call_with_shared, [(fn, it) for it in items], chunksize=chunk)

    def close(self):
        if self.pool is not None:
            self.pool.terminate()
            self.pool.join()
            self.pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class WorkerPool:
    def __init__(self, workers: int = 1):
        if workers < 1:
            raise InvalidParameterError("workers must be >= 1")
        self.workers = workers

    def session(self, shared) -> _Session:
        """Open a multi-phase session over one shared read-only input."""
        return _Session(self.workers, shared)

    def map(self, fn, shared, items):
        """Apply fn(shared, item) for every item, in order.

        ``shared`` is the read-only input published to all workers;
        ``fn`` must be a module-level function (it is sent by reference).
        """
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(shared, it) for it in items]
        with _Session(min(self.workers, len(items)), shared) as session:
            return session.map(fn, items)
