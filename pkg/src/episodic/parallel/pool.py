"""Worker pool management.

Wraps a concurrent.futures executor so callers get ordered results and
chunk boundaries that depend only on input length and worker count.
"""

import math
from concurrent.futures import Executor, Future, ProcessPoolExecutor, ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

from episodic.config.settings import settings
from episodic.core.exceptions import ConfigurationError
from episodic.core.logger import setup_logger

logger = setup_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

Bounds = Tuple[int, int]


class WorkerPool:
    """Fixed-size pool of thread or process workers.

    Features:
    - Lazy executor creation (a pool that never fans out never spawns workers)
    - Results returned in task order; the first failure by task order is raised
    - ``workers == 1`` runs everything inline
    """

    def __init__(
        self,
        workers: Optional[int] = None,
        kind: str = "thread",
        min_chunk: Optional[int] = None,
    ):
        """Initialize worker pool.

        Args:
            workers: Number of workers (default from settings)
            kind: "thread" or "process"
            min_chunk: Smallest number of items worth a separate task (default from settings)
        """
        self.workers = workers if workers is not None else settings.workers
        self.kind = kind
        self.min_chunk = min_chunk if min_chunk is not None else settings.parallel_min_chunk
        self._executor: Optional[Executor] = None

        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if kind not in ("thread", "process"):
            raise ConfigurationError(f"unknown executor kind {kind!r}")

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def _get_executor(self) -> Executor:
        if self._executor is None:
            if self.kind == "process":
                self._executor = ProcessPoolExecutor(max_workers=self.workers)
            else:
                self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="episodic")
            logger.debug(f"Started {self.kind} pool with {self.workers} workers")
        return self._executor

    def chunk_bounds(self, n: int, min_chunk: Optional[int] = None) -> List[Bounds]:
        """Split ``range(n)`` into contiguous blocks, at most one per worker.

        Args:
            n: Number of items
            min_chunk: Override of the pool's minimum block size

        Returns:
            List of (start, stop) pairs covering 0..n in order (empty when n == 0)
        """
        if n <= 0:
            return []
        floor = min_chunk if min_chunk is not None else self.min_chunk
        blocks = max(1, min(self.workers, math.ceil(n / max(1, floor))))
        step = math.ceil(n / blocks)
        return [(start, min(start + step, n)) for start in range(0, n, step)]

    def map_ordered(self, fn: Callable[[T], R], tasks: Sequence[T]) -> List[R]:
        """Apply ``fn`` to every task, returning results in task order."""
        if self.workers == 1 or len(tasks) <= 1:
            return [fn(task) for task in tasks]

        executor = self._get_executor()
        futures: List[Future] = [executor.submit(fn, task) for task in tasks]
        try:
            return [future.result() for future in futures]
        except BaseException:
            for future in futures:
                future.cancel()
            raise


def default_pool(workers: Optional[int] = None) -> WorkerPool:
    """Shared thread pool for callers that pass none (used by the array primitives)."""
    return _shared_pool(workers if workers is not None else settings.workers)


@lru_cache(maxsize=None)
def _shared_pool(workers: int) -> WorkerPool:
    return WorkerPool(workers=workers, kind="thread")
