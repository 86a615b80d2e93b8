"""episodic - parallel counting and mining of serial episodes in event streams."""

__version__ = "1.0.0"
