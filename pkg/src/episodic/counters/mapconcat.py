"""Segmented MapConcat counter.

The stream is cut into P segments. Because any occurrence spans at most
W = sum of the upper bounds, the sequential machine's state on entering a
segment is one of:

- "restarted at j": its last completion ended at a last-type event j inside
  the tail window (the events of the previous segments within W of the
  segment start), so it resumed empty at j + 1;
- "fresh": no completion inside the tail window, in which case a machine
  started empty at the window start behaves identically from the segment
  start on.

The map step runs one machine per possible entry state of every segment.
The concat step follows the chain of entry states from segment 0, summing
counts: a machine continues another iff its start offset is the index right
after the other's last completion (or both agree on the fresh state).
"""

import bisect
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from episodic.config.constants import TIME_SENTINEL
from episodic.config.settings import settings
from episodic.core.logger import setup_logger
from episodic.counters.base import EpisodeCounter
from episodic.counters.fsm import EpisodeMachine, RelevantEvents, run_machine
from episodic.models.episode import Episode
from episodic.models.stream import EventStream, TypeIndex
from episodic.parallel.pool import WorkerPool

logger = setup_logger(__name__)

FRESH = -1  # entry-state key of the fresh machine


@dataclass
class SegmentMachineResult:
    """Map-step output of one (segment, entry state) machine.

    Attributes:
        segment_id: Segment number
        start_offset: Stream index where the machine began
        count: Occurrences completed inside the segment
        first_end: End time of the first counted occurrence
        last_end: End time of the last counted occurrence
        exit_offset: Start offset of the machine it hands over to in the next
            segment (last completion index + 1), or None for the fresh machine
    """

    segment_id: int
    start_offset: int
    count: int = 0
    first_end: Optional[int] = None
    last_end: Optional[int] = None
    exit_offset: Optional[int] = None


@dataclass
class _MachineTask:
    segment_id: int
    seg_start: int
    seg_stop: int
    entry: int  # stream index of the entry completion, or FRESH
    start_offset: int
    last_end: int
    next_window_start: int  # first index inside the next segment's tail window


@dataclass
class MapConcatResult:
    """Count plus the map-step table."""

    count: int
    segments: List[Tuple[int, int]] = field(default_factory=list)
    machines: Dict[Tuple[int, int], SegmentMachineResult] = field(default_factory=dict)


def segment_bounds(n: int, segments: int) -> List[Tuple[int, int]]:
    """Non-empty contiguous [start, stop) segments covering 0..n."""
    cuts = sorted({(p * n) // segments for p in range(segments + 1)})
    return list(zip(cuts[:-1], cuts[1:]))


def _run_task(episode: Episode, events: RelevantEvents, task: _MachineTask) -> SegmentMachineResult:
    machine = EpisodeMachine(episode, last_end=task.last_end)
    start = bisect.bisect_left(events.stream_index, task.start_offset)
    stop = bisect.bisect_left(events.stream_index, task.seg_stop)
    run = run_machine(machine, events, start, stop, record_from=task.seg_start)

    last_completion = run.completions[-1][0] if run.completions else task.entry
    exit_offset = None
    if last_completion != FRESH and last_completion >= task.next_window_start:
        exit_offset = last_completion + 1

    return SegmentMachineResult(
        segment_id=task.segment_id,
        start_offset=task.start_offset,
        count=run.count,
        first_end=run.first_end,
        last_end=run.last_end,
        exit_offset=exit_offset,
    )


def run_mapconcat(
    stream: EventStream,
    episode: Episode,
    segments: int,
    pool: Optional[WorkerPool] = None,
) -> MapConcatResult:
    """
    MapConcat count with its map-step table.

    Args:
        stream: Event stream
        episode: Episode
        segments: Number of segments P >= 1
        pool: Worker pool for the map step

    Returns:
        MapConcatResult
    """
    if segments < 1:
        raise ValueError(f"segments must be >= 1, got {segments}")
    n = len(stream)
    if n == 0:
        return MapConcatResult(count=0)

    times = stream.times
    last_type = episode.types[-1]
    span = episode.max_span
    events = RelevantEvents.select(stream, episode)
    bounds = segment_bounds(n, segments)

    window_starts = [int(np.searchsorted(times, times[a] - span, side="left")) for a, _ in bounds]

    tasks: List[_MachineTask] = []
    for p, (a, b) in enumerate(bounds):
        w = window_starts[p]
        next_w = window_starts[p + 1] if p + 1 < len(bounds) else n
        tasks.append(_MachineTask(p, a, b, FRESH, w, TIME_SENTINEL, next_w))
        for j in range(w, a):
            if stream.types[j] == last_type:
                tasks.append(_MachineTask(p, a, b, j, j + 1, int(times[j]), next_w))

    if pool is None:
        with WorkerPool(kind="thread") as owned:
            results = owned.map_ordered(lambda task: _run_task(episode, events, task), tasks)
    else:
        results = pool.map_ordered(lambda task: _run_task(episode, events, task), tasks)

    machines: Dict[Tuple[int, int], SegmentMachineResult] = {}
    for task, result in zip(tasks, results):
        machines[(task.segment_id, task.start_offset)] = result

    # Concat: follow entry states from the fresh machine of segment 0
    total = 0
    offset = window_starts[0]
    for p in range(len(bounds)):
        machine = machines[(p, offset)]
        total += machine.count
        offset = machine.exit_offset if machine.exit_offset is not None else (
            window_starts[p + 1] if p + 1 < len(bounds) else n
        )

    logger.debug(f"MapConcat over {len(bounds)} segments ran {len(tasks)} machines")
    return MapConcatResult(count=total, segments=bounds, machines=machines)


def count_mapconcat(
    stream: EventStream,
    episode: Episode,
    segments: int,
    pool: Optional[WorkerPool] = None,
) -> int:
    """Non-overlapped count via segmented state machines."""
    return run_mapconcat(stream, episode, segments, pool).count


class MapConcatCounter(EpisodeCounter):
    """MapConcat backend."""

    name = "mapconcat"

    def __init__(self, segments: Optional[int] = None, workers: Optional[int] = None):
        self.segments = segments if segments is not None else settings.default_segments
        self.workers = workers if workers is not None else settings.workers

    def count(self, stream: EventStream, index: TypeIndex, episode: Episode) -> int:
        with WorkerPool(workers=self.workers, kind="thread") as pool:
            return count_mapconcat(stream, episode, self.segments, pool)

    def describe(self) -> dict:
        return {"algo": self.name, "segments": self.segments, "workers": self.workers}

    def single_worker(self) -> "MapConcatCounter":
        return MapConcatCounter(segments=self.segments, workers=1)
