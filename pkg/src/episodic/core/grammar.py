"""Episode grammar.

``TYPE ( '-(' INT ',' INT ']-' TYPE )*``, e.g. ``A-(2,5]-B-(0,6]-C``.
Type names map to ids through a SymbolTable.
"""

import re

from episodic.core.exceptions import EmptyIntervalError, EpisodeSyntaxError
from episodic.core.logger import setup_logger
from episodic.core.stream_io import SymbolTable
from episodic.models.episode import Episode, IntervalConstraint

logger = setup_logger(__name__)

# Type names: anything but the grammar's punctuation and whitespace
_TYPE_RE = re.compile(r"[^\s\-(),\]]+")
_LINK_RE = re.compile(r"-\((\d+),(\d+)\]-")
_LINK_START_RE = re.compile(r"-\(")


def parse_episode(text: str, symbols: SymbolTable) -> Episode:
    """
    Parse episode text into an Episode.

    Args:
        text: Episode in the grammar above (surrounding whitespace ignored)
        symbols: Symbol table resolving type names

    Returns:
        Parsed Episode

    Raises:
        EpisodeSyntaxError: malformed text
        EmptyIntervalError: a constraint with low >= high
        UnknownEventTypeError: a name missing from ``symbols``
    """
    source = text.strip()
    pos = 0
    types = []
    constraints = []

    while True:
        match = _TYPE_RE.match(source, pos)
        if not match:
            raise EpisodeSyntaxError("expected event type", source[pos:] or "<end>", pos)
        types.append(symbols.id_of(match.group(0), position=pos))
        pos = match.end()

        if pos == len(source):
            break

        link = _LINK_RE.match(source, pos)
        if not link:
            if _LINK_START_RE.match(source, pos):
                raise EpisodeSyntaxError("malformed constraint", source[pos:], pos)
            raise EpisodeSyntaxError("unexpected token", source[pos:], pos)

        low, high = int(link.group(1)), int(link.group(2))
        if low >= high:
            raise EmptyIntervalError("empty constraint interval", link.group(0), pos)
        constraints.append(IntervalConstraint(low=low, high=high))
        pos = link.end()

    return Episode(types=tuple(types), constraints=tuple(constraints))


def format_episode(episode: Episode, symbols: SymbolTable) -> str:
    """Render an Episode in the grammar accepted by ``parse_episode``."""
    parts = [symbols.name_of(episode.types[0])]
    for constraint, type_id in zip(episode.constraints, episode.types[1:]):
        parts.append(f"-{constraint}-")
        parts.append(symbols.name_of(type_id))
    return "".join(parts)


def parse_constraints(text: str) -> list:
    """Parse a ``;``-separated constraint alphabet such as ``(5,10];(10,15]``."""
    constraints = []
    for pos, raw in enumerate(part.strip() for part in text.split(";")):
        if not raw:
            continue
        match = re.fullmatch(r"\((\d+),(\d+)\]", raw)
        if not match:
            raise EpisodeSyntaxError("malformed constraint", raw, pos)
        low, high = int(match.group(1)), int(match.group(2))
        if low >= high:
            raise EmptyIntervalError("empty constraint interval", raw, pos)
        constraint = IntervalConstraint(low=low, high=high)
        if constraint not in constraints:
            constraints.append(constraint)
    if not constraints:
        raise EpisodeSyntaxError("empty constraint alphabet", text, 0)
    return constraints
