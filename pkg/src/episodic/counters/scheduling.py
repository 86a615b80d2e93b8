"""Greedy overlap removal (interval scheduling by earliest end)."""

from typing import Tuple

from episodic.config.constants import TIME_SENTINEL
from episodic.core.exceptions import UnsortedOccurrencesError
from episodic.core.logger import setup_logger
from episodic.models.occurrence import IntervalLike, OccurrenceSet

logger = setup_logger(__name__)


def greedy_schedule(occurrences: IntervalLike) -> int:
    """
    Size of the largest set of non-overlapped occurrences.

    Selects an occurrence when its start is strictly after the end of the
    last selected one. ``prev_end`` starts below every timestamp so an
    occurrence starting at 0 is selectable.

    Args:
        occurrences: Intervals sorted by end time (OccurrenceSet or (start, end) pairs)

    Returns:
        Number of selected occurrences

    Raises:
        UnsortedOccurrencesError: ends are not non-decreasing
    """
    occ = OccurrenceSet.coerce(occurrences)
    position = occ.first_unsorted()
    if position >= 0:
        raise UnsortedOccurrencesError(position)

    count = 0
    prev_end = TIME_SENTINEL
    for start, end in zip(occ.starts.tolist(), occ.ends.tolist()):
        if prev_end < start:
            prev_end = end
            count += 1
    return count


def order_by_end(occurrences: IntervalLike) -> Tuple[OccurrenceSet, bool]:
    """
    Verify end-time order in O(k), sorting only on violation.

    Returns:
        Tuple of (occurrences sorted by end, whether a sort was needed)
    """
    occ = OccurrenceSet.coerce(occurrences)
    position = occ.first_unsorted()
    if position < 0:
        return occ, False

    logger.warning(f"Occurrences out of end-time order at position {position}, sorting {len(occ)} intervals")
    return occ.sorted_by_end(), True
