"""Occurrence intervals and tracked items.

Collections are columnar (numpy arrays) because the tracking counter moves
hundreds of thousands of them per step; the NamedTuples are the scalar view.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from episodic.config.constants import TIME_DTYPE


class OccurrenceInterval(NamedTuple):
    """(start, end) timestamps of one complete episode occurrence."""

    start: int
    end: int


class TrackedItem(NamedTuple):
    """One event reached by tracking plus the chain-extreme timestamp.

    ``chain_time`` is the chain's start time in forward mode and its end time
    in backward mode.
    """

    event_index: int
    chain_time: int


class Direction(str, Enum):
    FORWARD = "fwd"
    BACKWARD = "bwd"


class CompactionStrategy(str, Enum):
    """How per-item next-event lists are gathered between tracking steps."""

    COUNT_SCAN_WRITE = "csw"
    FLAG_COMPACT = "flag"
    CONCURRENT_APPEND = "append"


@dataclass(frozen=True)
class TrackedItems:
    """Columnar TrackedItem sequence, ascending by event_index."""

    event_index: np.ndarray
    chain_time: np.ndarray

    def __len__(self) -> int:
        return len(self.event_index)

    @classmethod
    def empty(cls) -> "TrackedItems":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=TIME_DTYPE))

    @classmethod
    def from_items(cls, items: Iterable[Tuple[int, int]]) -> "TrackedItems":
        pairs = list(items)
        return cls(
            np.array([p[0] for p in pairs], dtype=np.int64),
            np.array([p[1] for p in pairs], dtype=TIME_DTYPE),
        )

    def to_items(self) -> List[TrackedItem]:
        return [TrackedItem(i, t) for i, t in zip(self.event_index.tolist(), self.chain_time.tolist())]


IntervalLike = Union["OccurrenceSet", Sequence[Tuple[int, int]], np.ndarray]


@dataclass(frozen=True)
class OccurrenceSet:
    """Columnar set of occurrence intervals."""

    starts: np.ndarray
    ends: np.ndarray

    def __len__(self) -> int:
        return len(self.starts)

    @classmethod
    def empty(cls) -> "OccurrenceSet":
        return cls(np.empty(0, dtype=TIME_DTYPE), np.empty(0, dtype=TIME_DTYPE))

    @classmethod
    def coerce(cls, occurrences: IntervalLike) -> "OccurrenceSet":
        """Accept an OccurrenceSet, an (k, 2) array or a sequence of pairs."""
        if isinstance(occurrences, OccurrenceSet):
            return occurrences
        pairs = np.array(occurrences if isinstance(occurrences, np.ndarray) else list(occurrences), dtype=TIME_DTYPE)
        if pairs.size == 0:
            return cls.empty()
        pairs = pairs.reshape(-1, 2)
        return cls(np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1]))

    def first_unsorted(self) -> int:
        """Index of the first end smaller than its predecessor, or -1."""
        if len(self.ends) < 2:
            return -1
        drops = np.flatnonzero(self.ends[1:] < self.ends[:-1])
        return int(drops[0]) + 1 if len(drops) else -1

    def sorted_by_end(self) -> "OccurrenceSet":
        order = np.lexsort((self.starts, self.ends))
        return OccurrenceSet(self.starts[order], self.ends[order])

    def to_intervals(self) -> List[OccurrenceInterval]:
        return [OccurrenceInterval(s, e) for s, e in zip(self.starts.tolist(), self.ends.tolist())]
