"""Exception hierarchy.

Library code raises these; the CLI maps ``ConfigurationError`` to exit code 1
and every other ``EpisodicError`` to exit code 2.
"""

from typing import Optional


class EpisodicError(Exception):
    """Root of all domain errors."""


class ConfigurationError(EpisodicError):
    """Invalid option combination or configuration value."""


# ------------------------------------------------------------------------------
# Episode grammar
# ------------------------------------------------------------------------------


class EpisodeParseError(EpisodicError):
    """Episode text could not be parsed.

    Attributes:
        token: The offending token (or the remaining text at the failure point)
        position: Character offset into the episode text
    """

    def __init__(self, message: str, token: str, position: int = 0):
        super().__init__(f"{message}: {token!r} at position {position}")
        self.token = token
        self.position = position


class EpisodeSyntaxError(EpisodeParseError):
    """Text does not follow ``TYPE ( '-(' INT ',' INT ']-' TYPE )*``."""


class EmptyIntervalError(EpisodeParseError):
    """Constraint has ``low >= high``."""


class UnknownEventTypeError(EpisodeParseError):
    """Type name missing from the symbol table."""


# ------------------------------------------------------------------------------
# Event files
# ------------------------------------------------------------------------------


class StreamFormatError(EpisodicError):
    """Malformed event-file line."""

    def __init__(self, message: str, line_no: int, source: Optional[str] = None):
        where = f"{source}:{line_no}" if source else f"line {line_no}"
        super().__init__(f"{where}: {message}")
        self.line_no = line_no
        self.source = source


class TimeRegressionError(StreamFormatError):
    """Event time smaller than the previous line's time."""


# ------------------------------------------------------------------------------
# Parallel primitives and counting
# ------------------------------------------------------------------------------


class ScanOverflowError(EpisodicError, OverflowError):
    """Prefix sum exceeds the 64-bit accumulator."""


class LengthMismatchError(EpisodicError, ValueError):
    """Parallel arrays of different lengths."""


class UnsortedOccurrencesError(EpisodicError):
    """Occurrences handed to the scheduler are not sorted by end time."""

    def __init__(self, position: int):
        super().__init__(f"occurrences not sorted by end time at position {position}")
        self.position = position


class OracleBoundError(EpisodicError):
    """Instance too large for exhaustive enumeration."""
