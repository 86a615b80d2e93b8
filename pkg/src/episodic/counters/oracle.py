"""Exhaustive ground truth for small instances.

Enumerates every valid occurrence and solves interval scheduling exactly.
Only meant for tests and ``--algo oracle`` on small inputs.
"""

from typing import Iterable, Optional, Sequence, Set

import numpy as np

from episodic.config.settings import settings
from episodic.core.exceptions import OracleBoundError
from episodic.core.logger import setup_logger
from episodic.counters.base import EpisodeCounter
from episodic.counters.scheduling import greedy_schedule
from episodic.models.episode import Episode
from episodic.models.occurrence import OccurrenceInterval, OccurrenceSet
from episodic.models.stream import EventStream, TypeIndex

logger = setup_logger(__name__)


def _check_bounds(stream: EventStream, episode: Episode, max_events: Optional[int], max_nodes: Optional[int]) -> None:
    max_events = max_events if max_events is not None else settings.oracle_max_events
    max_nodes = max_nodes if max_nodes is not None else settings.oracle_max_nodes
    if len(stream) > max_events:
        raise OracleBoundError(f"stream has {len(stream)} events, oracle limit is {max_events}")
    if episode.size > max_nodes:
        raise OracleBoundError(f"episode has {episode.size} nodes, oracle limit is {max_nodes}")


def enumerate_all(
    stream: EventStream,
    episode: Episode,
    max_events: Optional[int] = None,
    max_nodes: Optional[int] = None,
) -> Set[OccurrenceInterval]:
    """
    Every valid occurrence, reduced to its (start, end) interval.

    Args:
        stream: Event stream
        episode: Episode
        max_events: Stream length guard (default from settings)
        max_nodes: Episode size guard (default from settings)

    Returns:
        Set of distinct occurrence intervals

    Raises:
        OracleBoundError: instance exceeds the guards
    """
    _check_bounds(stream, episode, max_events, max_nodes)

    times = stream.times.tolist()
    by_type = {}
    for i, type_id in enumerate(stream.types.tolist()):
        by_type.setdefault(type_id, []).append(i)

    found: Set[OccurrenceInterval] = set()

    def extend(k: int, last: int, start_time: int) -> None:
        if k == episode.size:
            found.add(OccurrenceInterval(start_time, times[last]))
            return
        constraint = episode.constraints[k - 1]
        for j in by_type.get(episode.types[k], ()):
            if j > last and constraint.admits(times[j] - times[last]):
                extend(k + 1, j, start_time)

    for i in by_type.get(episode.types[0], ()):
        extend(1, i, times[i])

    return found


def is_occurrence(stream: EventStream, episode: Episode, indices: Sequence[int]) -> bool:
    """True when ``indices`` (ascending stream positions) bind a valid occurrence."""
    if len(indices) != episode.size:
        return False
    if any(i < 0 or i >= len(stream) for i in indices):
        return False
    if any(b <= a for a, b in zip(indices, indices[1:])):
        return False
    if any(int(stream.types[i]) != t for i, t in zip(indices, episode.types)):
        return False
    gaps = np.diff(stream.times[list(indices)]).tolist()
    return all(c.admits(g) for c, g in zip(episode.constraints, gaps))


def max_nonoverlap(occurrences: Iterable) -> int:
    """
    Size of the largest pairwise non-overlapped subset.

    Earliest-end greedy is optimal for interval scheduling; overlap is
    ``later.start <= earlier.end``.
    """
    pairs = sorted(((int(s), int(e)) for s, e in occurrences), key=lambda p: (p[1], p[0]))
    return greedy_schedule(OccurrenceSet.coerce(pairs))


class OracleCounter(EpisodeCounter):
    """Exhaustive backend (small inputs only)."""

    name = "oracle"

    def count(self, stream: EventStream, index: TypeIndex, episode: Episode) -> int:
        return max_nonoverlap(enumerate_all(stream, episode))
