"""Parallel local tracking counter.

Counting is split in two: every occurrence-representative interval is found
by tracking all events of one episode position to the next in parallel,
then overlaps are removed greedily.

Each tracking step compacts the per-item next-event lists with one of three
strategies:

- CountScanWrite: count next events per item, exclusive scan for offsets,
  look the windows up again and write (lock-free, ordered).
- FlagCompact: every item fills a fixed slab of slots, unused slots are
  flagged 0 and the whole slab is flag-compacted (lock-free, ordered).
- ConcurrentAppend: each task reserves an output offset from a shared
  counter and appends its block (lock-based, unordered, sorted afterwards).

Per to-event only the dominant chain survives: the latest start in forward
mode, the earliest end in backward mode.
"""

import threading
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from episodic.config.constants import TIME_DTYPE, TIME_SENTINEL
from episodic.config.settings import settings
from episodic.core.logger import setup_logger
from episodic.counters.base import EpisodeCounter
from episodic.counters.scheduling import greedy_schedule, order_by_end
from episodic.models.episode import Episode, IntervalConstraint
from episodic.models.occurrence import CompactionStrategy, Direction, OccurrenceSet, TrackedItems
from episodic.models.stream import EventStream, TypeIndex
from episodic.parallel.pool import WorkerPool, default_pool
from episodic.parallel.scan import compact_flags, count_scan_write

logger = setup_logger(__name__)

_TIME_MAX = np.iinfo(np.int64).max


@dataclass
class TrackingResult:
    """Outcome of one tracking count."""

    count: int
    occurrences: OccurrenceSet
    step_sizes: List[int] = field(default_factory=list)
    sort_fallbacks: int = 0
    elapsed_ms: float = 0.0


class _Windows:
    """Constraint windows of a batch of items over the to-type position list."""

    def __init__(
        self,
        item_times: np.ndarray,
        to_times: np.ndarray,
        constraint: IntervalConstraint,
        direction: Direction,
    ):
        self.item_times = item_times
        self.to_times = to_times
        self.low = constraint.low
        self.high = constraint.high
        self.forward = direction == Direction.FORWARD

    def bounds(self, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        """[lo, hi) ranks into the to-type list for items start..stop."""
        t = self.item_times[start:stop]
        if self.forward:
            # to-time in (t + low, t + high]
            lo = np.searchsorted(self.to_times, t + self.low, side="right")
            hi = np.searchsorted(self.to_times, t + self.high, side="right")
        else:
            # to-time in [t - high, t - low)
            lo = np.searchsorted(self.to_times, t - self.high, side="left")
            hi = np.searchsorted(self.to_times, t - self.low, side="left")
        return lo.astype(np.int64), np.maximum(hi, lo).astype(np.int64)


def _expand(lo: np.ndarray, counts: np.ndarray, chains: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Item-ordered next-event ranks and inherited chain times."""
    total = int(counts.sum())
    owner = np.repeat(np.arange(len(counts)), counts)
    starts = np.cumsum(counts) - counts
    ranks = lo[owner] + (np.arange(total) - starts[owner])
    return ranks, chains[owner]


def _scatter_block(ranks: np.ndarray, chains: np.ndarray, forward: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Unique ranks of one block with their dominant chain."""
    if len(ranks) == 0:
        return ranks, chains
    low = int(ranks.min())
    fill = TIME_SENTINEL if forward else _TIME_MAX
    best = np.full(int(ranks.max()) - low + 1, fill, dtype=TIME_DTYPE)
    (np.maximum if forward else np.minimum).at(best, ranks - low, chains)
    keep = np.flatnonzero(best != fill)
    return keep + low, best[keep]


def _dedup_scatter(
    ranks: np.ndarray,
    chains: np.ndarray,
    to_pos: np.ndarray,
    forward: bool,
    pool: WorkerPool,
) -> TrackedItems:
    """Keep one item per to-event via scatter-max (forward) or scatter-min (backward).

    Blocks reduce in parallel; their winners (at most one per rank and block)
    are merged serially.
    """
    fill = TIME_SENTINEL if forward else _TIME_MAX
    best = np.full(len(to_pos), fill, dtype=TIME_DTYPE)
    reduce = np.maximum if forward else np.minimum
    parts = pool.map_ordered(
        lambda bounds: _scatter_block(ranks[bounds[0]:bounds[1]], chains[bounds[0]:bounds[1]], forward),
        pool.chunk_bounds(len(ranks)),
    )
    for part_ranks, part_chains in parts:
        best[part_ranks] = reduce(best[part_ranks], part_chains)
    keep = np.flatnonzero(best != fill)
    return TrackedItems(to_pos[keep], best[keep])


def _dedup_sorted(ranks: np.ndarray, chains: np.ndarray, to_pos: np.ndarray, forward: bool) -> TrackedItems:
    """Keep one item per to-event from rank-sorted arrays."""
    if len(ranks) == 0:
        return TrackedItems.empty()
    heads = np.flatnonzero(np.r_[True, ranks[1:] != ranks[:-1]])
    reduce = np.maximum if forward else np.minimum
    return TrackedItems(to_pos[ranks[heads]], reduce.reduceat(chains, heads))


def _compact_count_scan_write(windows: _Windows, chains: np.ndarray, pool: WorkerPool):
    def count_block(start: int, stop: int) -> np.ndarray:
        lo, hi = windows.bounds(start, stop)
        return hi - lo

    def write_block(start: int, stop: int, offsets: np.ndarray, out) -> None:
        # Second lookup of the same windows, now writing
        lo, hi = windows.bounds(start, stop)
        ranks, inherited = _expand(lo, hi - lo, chains[start:stop])
        if len(ranks):
            base = int(offsets[0])
            out[0][base:base + len(ranks)] = ranks
            out[1][base:base + len(ranks)] = inherited

    def allocate(total: int):
        return np.empty(total, dtype=np.int64), np.empty(total, dtype=TIME_DTYPE)

    return count_scan_write(len(chains), count_block, write_block, allocate, pool)


def _compact_flags(
    windows: _Windows,
    chains: np.ndarray,
    pool: WorkerPool,
    slab_width: int,
):
    lo, hi = windows.bounds(0, len(chains))
    cols = np.arange(slab_width, dtype=np.int64)
    rank_parts = []
    chain_parts = []

    # Items with more next-events than slots continue in further rounds
    offset = 0
    while True:
        fill = np.clip(hi - (lo + offset), 0, slab_width)
        if not fill.any():
            break
        slab_ranks = (lo + offset)[:, None] + cols[None, :]
        slab_chains = np.broadcast_to(chains[:, None], slab_ranks.shape)
        flags = cols[None, :] < fill[:, None]
        rank_parts.append(compact_flags(slab_ranks.reshape(-1), flags.reshape(-1), pool))
        chain_parts.append(compact_flags(np.ascontiguousarray(slab_chains).reshape(-1), flags.reshape(-1), pool))
        offset += slab_width

    if not rank_parts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=TIME_DTYPE)
    return np.concatenate(rank_parts), np.concatenate(chain_parts)


class _OffsetCounter:
    """Linearizable fetch-and-add."""

    def __init__(self):
        self._value = 0
        self._lock = threading.Lock()

    def fetch_add(self, amount: int) -> int:
        with self._lock:
            previous = self._value
            self._value += amount
            return previous

    @property
    def value(self) -> int:
        return self._value


def _compact_concurrent_append(windows: _Windows, chains: np.ndarray, pool: WorkerPool):
    counter = _OffsetCounter()
    blocks = []
    blocks_lock = threading.Lock()

    def append_block(bounds) -> None:
        start, stop = bounds
        lo, hi = windows.bounds(start, stop)
        ranks, inherited = _expand(lo, hi - lo, chains[start:stop])
        offset = counter.fetch_add(len(ranks))
        with blocks_lock:
            blocks.append((offset, ranks, inherited))

    pool.map_ordered(append_block, pool.chunk_bounds(len(chains)))

    total = counter.value
    out_ranks = np.empty(total, dtype=np.int64)
    out_chains = np.empty(total, dtype=TIME_DTYPE)
    for offset, ranks, inherited in blocks:
        out_ranks[offset:offset + len(ranks)] = ranks
        out_chains[offset:offset + len(ranks)] = inherited

    # Reservation order is arbitrary, so the gathered list must be sorted
    order = np.argsort(out_ranks, kind="stable")
    return out_ranks[order], out_chains[order]


def flag_slab_width(index: TypeIndex, constraint: IntervalConstraint, cap: Optional[int] = None) -> int:
    """Slots per item: most same-type events a window can hold, capped."""
    cap = cap if cap is not None else settings.flag_slab_cap
    bound = (constraint.high - constraint.low) * max(1, index.max_multiplicity)
    return max(1, min(bound, cap))


def track_step(
    stream: EventStream,
    index: TypeIndex,
    items: TrackedItems,
    from_type: int,
    to_type: int,
    constraint: IntervalConstraint,
    direction: Direction = Direction.FORWARD,
    strategy: CompactionStrategy = CompactionStrategy.COUNT_SCAN_WRITE,
    pool: Optional[WorkerPool] = None,
) -> TrackedItems:
    """
    Advance every tracked item to the reachable events of ``to_type``.

    Args:
        stream: Event stream
        index: Type index of ``stream``
        items: Items on events of ``from_type``, ascending by event_index
        from_type: Type of the current episode position
        to_type: Type of the next position (previous one in backward mode)
        constraint: Gap constraint between the two positions
        direction: Forward (chain_time = start) or backward (chain_time = end)
        strategy: Compaction strategy
        pool: Worker pool

    Returns:
        Deduplicated items on ``to_type`` events, ascending by event_index
    """
    if len(items) == 0:
        return TrackedItems.empty()

    pool = pool or default_pool()
    strategy = CompactionStrategy(strategy)
    forward = Direction(direction) == Direction.FORWARD
    to_pos = index.positions[to_type]
    windows = _Windows(stream.times[items.event_index], index.times[to_type], constraint, Direction(direction))

    if strategy == CompactionStrategy.COUNT_SCAN_WRITE:
        ranks, chains = _compact_count_scan_write(windows, items.chain_time, pool)
        return _dedup_scatter(ranks, chains, to_pos, forward, pool)
    if strategy == CompactionStrategy.FLAG_COMPACT:
        width = flag_slab_width(index, constraint)
        ranks, chains = _compact_flags(windows, items.chain_time, pool, width)
        return _dedup_scatter(ranks, chains, to_pos, forward, pool)

    ranks, chains = _compact_concurrent_append(windows, items.chain_time, pool)
    return _dedup_sorted(ranks, chains, to_pos, forward)


def find_occurrences(
    stream: EventStream,
    index: TypeIndex,
    episode: Episode,
    direction: Direction = Direction.FORWARD,
    strategy: CompactionStrategy = CompactionStrategy.COUNT_SCAN_WRITE,
    pool: Optional[WorkerPool] = None,
    step_sizes: Optional[List[int]] = None,
) -> OccurrenceSet:
    """
    Occurrence intervals representing every occurrence of ``episode``.

    Seeds one item per event of the first (forward) or last (backward) type
    and applies N-1 tracking steps. The greedy non-overlap count of the
    result equals that of the full occurrence set.

    Args:
        stream: Event stream
        index: Type index of ``stream``
        episode: Episode to track
        direction: Tracking direction
        strategy: Compaction strategy
        pool: Worker pool
        step_sizes: When given, receives the item count entering each step

    Returns:
        OccurrenceSet, one interval per surviving item
    """
    direction = Direction(direction)
    pool = pool or default_pool()
    n = episode.size

    if direction == Direction.FORWARD:
        path = [(episode.types[k], episode.types[k + 1], episode.constraints[k]) for k in range(n - 1)]
        seed = episode.types[0]
    else:
        path = [(episode.types[k], episode.types[k - 1], episode.constraints[k - 1]) for k in range(n - 1, 0, -1)]
        seed = episode.types[-1]

    seed_pos = index.positions[seed]
    items = TrackedItems(seed_pos, index.times[seed])

    for from_type, to_type, constraint in path:
        if step_sizes is not None:
            step_sizes.append(len(items))
        if len(items) == 0:
            break
        items = track_step(stream, index, items, from_type, to_type, constraint, direction, strategy, pool)
        logger.debug(f"Tracking step {from_type}->{to_type} kept {len(items)} items")

    own_times = stream.times[items.event_index]
    if direction == Direction.FORWARD:
        return OccurrenceSet(items.chain_time, own_times)
    return OccurrenceSet(own_times, items.chain_time)


def run_tracking(
    stream: EventStream,
    index: TypeIndex,
    episode: Episode,
    direction: Direction = Direction.FORWARD,
    strategy: CompactionStrategy = CompactionStrategy.COUNT_SCAN_WRITE,
    pool: Optional[WorkerPool] = None,
) -> TrackingResult:
    """Tracking count with run statistics (step sizes, sort fallbacks, timing)."""
    started = time.perf_counter()
    step_sizes: List[int] = []
    occurrences = find_occurrences(stream, index, episode, direction, strategy, pool, step_sizes)
    ordered, fallback = order_by_end(occurrences)
    count = greedy_schedule(ordered)
    return TrackingResult(
        count=count,
        occurrences=ordered,
        step_sizes=step_sizes,
        sort_fallbacks=int(fallback),
        elapsed_ms=(time.perf_counter() - started) * 1000,
    )


def count_tracking(
    stream: EventStream,
    index: TypeIndex,
    episode: Episode,
    direction: Direction = Direction.FORWARD,
    strategy: CompactionStrategy = CompactionStrategy.COUNT_SCAN_WRITE,
    pool: Optional[WorkerPool] = None,
) -> int:
    """Non-overlapped count via parallel local tracking and greedy scheduling."""
    return run_tracking(stream, index, episode, direction, strategy, pool).count


class TrackingCounter(EpisodeCounter):
    """Parallel local tracking backend."""

    name = "tracking"

    def __init__(
        self,
        direction: Direction = Direction.FORWARD,
        strategy: CompactionStrategy = CompactionStrategy.COUNT_SCAN_WRITE,
        workers: Optional[int] = None,
    ):
        self.direction = Direction(direction)
        self.strategy = CompactionStrategy(strategy)
        self.workers = workers if workers is not None else settings.workers
        self._pool: Optional[WorkerPool] = None
        self.sort_fallbacks = 0

    @property
    def pool(self) -> WorkerPool:
        if self._pool is None:
            self._pool = WorkerPool(workers=self.workers, kind="thread")
        return self._pool

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool = None

    def __getstate__(self) -> dict:
        # Pools do not cross process boundaries
        state = self.__dict__.copy()
        state["_pool"] = None
        return state

    def count(self, stream: EventStream, index: TypeIndex, episode: Episode) -> int:
        result = run_tracking(stream, index, episode, self.direction, self.strategy, self.pool)
        self.sort_fallbacks += result.sort_fallbacks
        return result.count

    def describe(self) -> dict:
        return {
            "algo": self.name,
            "strategy": self.strategy.value,
            "direction": self.direction.value,
            "workers": self.workers,
        }

    def single_worker(self) -> "TrackingCounter":
        return TrackingCounter(direction=self.direction, strategy=self.strategy, workers=1)
