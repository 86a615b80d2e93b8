"""Sequential state-machine counter.

One left-to-right pass keeping, per episode position, the timestamps of
events that end a valid partial occurrence. A completed occurrence bumps the
count and clears every list; only events strictly after its end may start
the next one.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np

from episodic.config.constants import TIME_SENTINEL
from episodic.core.logger import setup_logger
from episodic.counters.base import EpisodeCounter
from episodic.models.episode import Episode
from episodic.models.stream import EventStream, TypeIndex

logger = setup_logger(__name__)


@dataclass
class RelevantEvents:
    """The events of a stream whose type occurs in one episode.

    Junk events never change the machine state, so they are dropped up front.
    """

    stream_index: List[int]
    types: List[int]
    times: List[int]

    @classmethod
    def select(cls, stream: EventStream, episode: Episode) -> "RelevantEvents":
        mask = np.isin(stream.types, np.array(sorted(set(episode.types)), dtype=np.int32))
        idx = np.flatnonzero(mask)
        return cls(idx.tolist(), stream.types[idx].tolist(), stream.times[idx].tolist())

    def __len__(self) -> int:
        return len(self.stream_index)


class EpisodeMachine:
    """Counting state machine for one episode.

    Attributes:
        lists: lists[k] = ascending timestamps accepted at position k
        last_end: end time of the last completed occurrence
        count: completed occurrences
    """

    def __init__(self, episode: Episode, last_end: int = TIME_SENTINEL):
        self.episode = episode
        self.size = episode.size
        self.lows = [c.low for c in episode.constraints]
        self.highs = [c.high for c in episode.constraints]
        self.lists: List[Deque[int]] = [deque() for _ in range(self.size)]
        self.last_end = last_end
        self.count = 0

        # Positions each type may fill, earliest first
        self.slots: Dict[int, List[int]] = {}
        for k, type_id in enumerate(episode.types):
            self.slots.setdefault(type_id, []).append(k)

    def feed(self, type_id: int, time: int) -> bool:
        """Process one event; True when it completes an occurrence."""
        slots = self.slots.get(type_id)
        if slots is None:
            return False

        for k in slots:
            if k == 0:
                if time <= self.last_end:
                    continue
            else:
                prev = self.lists[k - 1]
                high = self.highs[k - 1]
                # Entries older than time - high are dead for every later event too
                while prev and time - prev[0] > high:
                    prev.popleft()
                if not prev or time - prev[0] <= self.lows[k - 1]:
                    continue

            if k == self.size - 1:
                self.count += 1
                self.last_end = time
                for entries in self.lists:
                    entries.clear()
                return True

            self.lists[k].append(time)

        return False


@dataclass
class MachineRun:
    """Result of feeding a range of relevant events to a machine."""

    count: int = 0
    first_end: Optional[int] = None
    last_end: Optional[int] = None
    completions: List[Tuple[int, int]] = field(default_factory=list)  # (stream index, time)


def run_machine(
    machine: EpisodeMachine,
    events: RelevantEvents,
    start: int,
    stop: int,
    record_from: int = 0,
) -> MachineRun:
    """
    Feed ``events[start:stop]`` (positions into ``events``) to ``machine``.

    Args:
        machine: Machine to advance (mutated)
        events: Relevant events of the stream
        start: First relevant-event position to feed
        stop: One past the last position to feed
        record_from: Completions at stream indices below this are not counted
            in the result (they still reset the machine)

    Returns:
        MachineRun with counted completions
    """
    run = MachineRun()
    types = events.types
    times = events.times
    stream_index = events.stream_index
    feed = machine.feed

    for pos in range(start, stop):
        if feed(types[pos], times[pos]):
            run.completions.append((stream_index[pos], times[pos]))
            if stream_index[pos] >= record_from:
                run.count += 1
                if run.first_end is None:
                    run.first_end = times[pos]
                run.last_end = times[pos]
    return run


def count_fsm(stream: EventStream, episode: Episode) -> int:
    """
    Count non-overlapped occurrences with the sequential state machine.

    Args:
        stream: Event stream
        episode: Episode (N >= 1)

    Returns:
        Size of a maximal set of non-overlapped occurrences
    """
    events = RelevantEvents.select(stream, episode)
    machine = EpisodeMachine(episode)
    feed = machine.feed
    for type_id, time in zip(events.types, events.times):
        feed(type_id, time)
    return machine.count


class FsmCounter(EpisodeCounter):
    """State-machine backend (the sequential baseline)."""

    name = "fsm"

    def count(self, stream: EventStream, index: TypeIndex, episode: Episode) -> int:
        return count_fsm(stream, episode)
