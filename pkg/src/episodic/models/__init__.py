"""Models module - episodes, event streams, occurrences."""

from episodic.models.episode import Episode, IntervalConstraint
from episodic.models.occurrence import (
    CompactionStrategy,
    Direction,
    OccurrenceInterval,
    OccurrenceSet,
    TrackedItem,
    TrackedItems,
)
from episodic.models.stream import EventStream, TypeIndex

__all__ = [
    "CompactionStrategy",
    "Direction",
    "Episode",
    "EventStream",
    "IntervalConstraint",
    "OccurrenceInterval",
    "OccurrenceSet",
    "TrackedItem",
    "TrackedItems",
    "TypeIndex",
]
