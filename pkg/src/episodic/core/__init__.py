"""Core module - logging, errors, episode grammar, event files and the type index."""

from episodic.core.logger import setup_logger

__all__ = ["setup_logger"]
