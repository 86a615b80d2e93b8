"""Event stream and per-type position index.

Both are immutable containers over read-only numpy arrays and may be shared
freely between worker threads.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Tuple

import numpy as np

from episodic.config.constants import TIME_DTYPE


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class EventStream:
    """Time-ordered (type_id, time_ms) events.

    Attributes:
        types: int32 type ids, one per event
        times: int64 timestamps (ms), non-decreasing
        alphabet_size: number of distinct event types (ids are < alphabet_size)
    """

    types: np.ndarray
    times: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        types = np.ascontiguousarray(self.types, dtype=np.int32)
        times = np.ascontiguousarray(self.times, dtype=TIME_DTYPE)
        if types.shape != times.shape or types.ndim != 1:
            raise ValueError("types and times must be 1-d arrays of equal length")
        if len(times):
            if times[0] < 0:
                raise ValueError("timestamps must be non-negative")
            if np.any(np.diff(times) < 0):
                raise ValueError("timestamps must be non-decreasing")
            if types.min() < 0 or types.max() >= self.alphabet_size:
                raise ValueError("type id outside the alphabet")
        object.__setattr__(self, "types", _frozen(types))
        object.__setattr__(self, "times", _frozen(times))

    @classmethod
    def from_events(
        cls,
        events: Iterable[Tuple[int, int]],
        alphabet_size: Optional[int] = None,
    ) -> "EventStream":
        """Build a stream from ``(type_id, time)`` pairs already in time order."""
        pairs = list(events)
        types = np.array([p[0] for p in pairs], dtype=np.int32)
        times = np.array([p[1] for p in pairs], dtype=TIME_DTYPE)
        if alphabet_size is None:
            alphabet_size = int(types.max()) + 1 if len(types) else 0
        return cls(types=types, times=times, alphabet_size=alphabet_size)

    @classmethod
    def empty(cls, alphabet_size: int = 0) -> "EventStream":
        return cls(
            types=np.empty(0, dtype=np.int32),
            times=np.empty(0, dtype=TIME_DTYPE),
            alphabet_size=alphabet_size,
        )

    def __len__(self) -> int:
        return len(self.times)

    def events(self) -> Iterator[Tuple[int, int]]:
        return zip(self.types.tolist(), self.times.tolist())


@dataclass(frozen=True)
class TypeIndex:
    """Per-type ascending position lists into an event stream.

    Attributes:
        positions: positions[t] = ascending stream indices of type t
        times: times[t] = timestamps at positions[t] (search keys for tracking)
        max_multiplicity: most events of a single type sharing one timestamp
    """

    positions: Tuple[np.ndarray, ...]
    times: Tuple[np.ndarray, ...]
    max_multiplicity: int = field(default=1)

    @property
    def alphabet_size(self) -> int:
        return len(self.positions)

    def count(self, type_id: int) -> int:
        return len(self.positions[type_id])
