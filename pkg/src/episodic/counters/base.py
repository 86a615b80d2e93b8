"""Abstract base for episode counting backends."""

from abc import ABC, abstractmethod

from episodic.models.episode import Episode
from episodic.models.stream import EventStream, TypeIndex


class EpisodeCounter(ABC):
    """Counts non-overlapped occurrences of one episode.

    This allows swapping between counting backends (state machine, parallel
    tracking, MapConcat, exhaustive oracle) wherever counts are needed.
    """

    name: str = "abstract"

    @abstractmethod
    def count(self, stream: EventStream, index: TypeIndex, episode: Episode) -> int:
        """Count non-overlapped occurrences of ``episode``.

        Args:
            stream: Event stream
            index: Type index built from ``stream``
            episode: Episode to count

        Returns:
            Size of the largest set of non-overlapped occurrences
        """
        pass

    def describe(self) -> dict:
        """Backend options for reports and logs."""
        return {"algo": self.name}

    def single_worker(self) -> "EpisodeCounter":
        """Equivalent backend that never fans out (for use inside pool tasks)."""
        return self
