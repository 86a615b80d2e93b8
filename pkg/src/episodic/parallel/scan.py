"""Deterministic data-parallel primitives.

Exclusive prefix scan, flag compaction and the count / scan / write pattern
that tracking compaction is built on. Every result is bit-identical for any
worker count: blocks are contiguous, block totals are folded serially in
block order, and each block writes a disjoint slice of the output.
"""

from typing import Any, Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

from episodic.config.constants import ACCUMULATOR_MAX
from episodic.core.exceptions import LengthMismatchError, ScanOverflowError
from episodic.core.logger import setup_logger
from episodic.parallel.pool import WorkerPool, default_pool

logger = setup_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_LOW_MASK = np.uint64(0xFFFFFFFF)
_HIGH_SHIFT = np.uint64(32)


def _as_counts(values: Any) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint64)
    if arr.dtype.kind not in "iub":
        raise TypeError(f"scan values must be integers, got dtype {arr.dtype}")
    if arr.dtype.kind == "i" and arr.min() < 0:
        raise ValueError("scan values must be non-negative")
    return np.ascontiguousarray(arr.reshape(-1), dtype=np.uint64)


def _exact_sum(block: np.ndarray) -> int:
    """Exact (non-wrapping) sum of a uint64 block as a Python int."""
    low = int(np.sum(block & _LOW_MASK, dtype=np.uint64))
    high = int(np.sum(block >> _HIGH_SHIFT, dtype=np.uint64))
    return (high << 32) + low


def exclusive_scan(values: Any, pool: Optional[WorkerPool] = None) -> np.ndarray:
    """
    Exclusive prefix sum with 64-bit unsigned accumulators.

    Args:
        values: Non-negative integers
        pool: Worker pool (default: thread pool sized from settings)

    Returns:
        uint64 array ``out`` with out[0] = 0 and out[k] = sum(values[:k])

    Raises:
        ScanOverflowError: the total does not fit in 64 bits
    """
    counts = _as_counts(values)
    n = len(counts)
    out = np.empty(n, dtype=np.uint64)
    if n == 0:
        return out

    pool = pool or default_pool()
    bounds = pool.chunk_bounds(n)

    totals = pool.map_ordered(lambda b: _exact_sum(counts[b[0]:b[1]]), bounds)
    offsets = []
    running = 0
    for total in totals:
        offsets.append(running)
        running += total
    if running > ACCUMULATOR_MAX:
        raise ScanOverflowError(f"prefix sum {running} exceeds the 64-bit accumulator")

    def write(task) -> None:
        (start, stop), offset = task
        local = np.cumsum(counts[start:stop], dtype=np.uint64)
        out[start] = offset
        out[start + 1:stop] = local[:-1] + np.uint64(offset)

    pool.map_ordered(write, list(zip(bounds, offsets)))
    return out


def count_scan_write(
    n: int,
    count_block: Callable[[int, int], np.ndarray],
    write_block: Callable[[int, int, np.ndarray, Any], None],
    allocate: Callable[[int], Any],
    pool: Optional[WorkerPool] = None,
) -> Any:
    """
    Three-phase compaction: count per item, scan for offsets, write.

    Args:
        n: Number of input items
        count_block: (start, stop) -> output count of each item in the block
        write_block: (start, stop, offsets, out) -> writes the block's outputs
            at ``offsets`` (one per item) into ``out``
        allocate: total -> output buffer
        pool: Worker pool

    Returns:
        The buffer produced by ``allocate``, fully written
    """
    pool = pool or default_pool()
    bounds = pool.chunk_bounds(n)
    if not bounds:
        return allocate(0)

    counts = np.concatenate(pool.map_ordered(lambda b: np.asarray(count_block(*b)), bounds))
    offsets = exclusive_scan(counts, pool)
    total = int(offsets[-1]) + int(counts[-1])

    out = allocate(total)
    pool.map_ordered(lambda b: write_block(b[0], b[1], offsets[b[0]:b[1]], out), bounds)
    return out


def compact_flags(values: Any, flags: Any, pool: Optional[WorkerPool] = None) -> Any:
    """
    Stable compaction: keep the items whose flag is 1.

    Args:
        values: Items (numpy array, compacted along axis 0, or any sequence)
        flags: 0/1 per item
        pool: Worker pool

    Returns:
        Kept items in original relative order; an ndarray for ndarray input,
        otherwise a list

    Raises:
        LengthMismatchError: ``len(values) != len(flags)``
    """
    as_array = isinstance(values, np.ndarray)
    if as_array:
        items = values
    else:
        seq = list(values)
        items = np.empty(len(seq), dtype=object)
        for i, item in enumerate(seq):
            items[i] = item

    mask = np.asarray(flags).reshape(-1).astype(bool)
    if len(items) != len(mask):
        raise LengthMismatchError(f"{len(items)} values but {len(mask)} flags")

    pool = pool or default_pool()
    bounds = pool.chunk_bounds(len(mask))
    block_counts = np.array(
        pool.map_ordered(lambda b: int(np.count_nonzero(mask[b[0]:b[1]])), bounds),
        dtype=np.uint64,
    )
    block_offsets = exclusive_scan(block_counts, pool) if len(bounds) else block_counts
    total = int(block_counts.sum()) if len(bounds) else 0

    out = np.empty((total,) + items.shape[1:], dtype=items.dtype)

    def write(task) -> None:
        (start, stop), offset, count = task
        out[offset:offset + count] = items[start:stop][mask[start:stop]]

    pool.map_ordered(write, list(zip(bounds, block_offsets.tolist(), block_counts.tolist())))
    return out if as_array else out.tolist()


def parallel_map_collect(
    inputs: Sequence[T],
    per_item: Callable[[T], Iterable[R]],
    pool: Optional[WorkerPool] = None,
) -> List[R]:
    """
    Flat-map ``per_item`` over ``inputs`` preserving input order.

    Each worker buffers the outputs of its block during the count phase; the
    exclusive scan of per-item counts places them; the write phase copies the
    buffers into their slots.

    Args:
        inputs: Items to expand
        per_item: Pure function returning 0..k outputs for one item
        pool: Worker pool

    Returns:
        Concatenation of per_item(inputs[0]), per_item(inputs[1]), ...
    """
    items = list(inputs)
    pool = pool or default_pool()
    buffers = {}

    def count_block(start: int, stop: int) -> np.ndarray:
        produced = [list(per_item(item)) for item in items[start:stop]]
        buffers[start] = produced
        return np.fromiter((len(p) for p in produced), dtype=np.uint64, count=len(produced))

    def write_block(start: int, stop: int, offsets: np.ndarray, out: List[R]) -> None:
        for offset, produced in zip(offsets.tolist(), buffers[start]):
            out[offset:offset + len(produced)] = produced

    return count_scan_write(len(items), count_block, write_block, lambda total: [None] * total, pool)
