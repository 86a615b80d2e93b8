"""Counting backends - state machine, parallel tracking, MapConcat and oracle."""

from typing import Optional

from episodic.core.exceptions import ConfigurationError
from episodic.counters.base import EpisodeCounter
from episodic.counters.fsm import FsmCounter, count_fsm
from episodic.counters.mapconcat import MapConcatCounter, count_mapconcat
from episodic.counters.oracle import OracleCounter, enumerate_all, max_nonoverlap
from episodic.counters.scheduling import greedy_schedule
from episodic.counters.tracking import TrackingCounter, count_tracking, find_occurrences, track_step
from episodic.models.occurrence import CompactionStrategy, Direction

ALGORITHMS = ("fsm", "tracking", "mapconcat", "oracle")


def get_counter(
    algo: str,
    strategy: CompactionStrategy = CompactionStrategy.COUNT_SCAN_WRITE,
    direction: Direction = Direction.FORWARD,
    workers: Optional[int] = None,
    segments: Optional[int] = None,
) -> EpisodeCounter:
    """Build the counting backend named ``algo``."""
    if algo == "fsm":
        return FsmCounter()
    if algo == "tracking":
        return TrackingCounter(direction=direction, strategy=strategy, workers=workers)
    if algo == "mapconcat":
        return MapConcatCounter(segments=segments, workers=workers)
    if algo == "oracle":
        return OracleCounter()
    raise ConfigurationError(f"unknown algorithm {algo!r}, expected one of {', '.join(ALGORITHMS)}")


__all__ = [
    "ALGORITHMS",
    "EpisodeCounter",
    "FsmCounter",
    "MapConcatCounter",
    "OracleCounter",
    "TrackingCounter",
    "count_fsm",
    "count_mapconcat",
    "count_tracking",
    "enumerate_all",
    "find_occurrences",
    "get_counter",
    "greedy_schedule",
    "max_nonoverlap",
    "track_step",
]
