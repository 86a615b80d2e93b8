"""Event-file reading and writing.

Format: UTF-8 text, one event per line ``<name>,<int_ms>``, lines in
non-decreasing time order, ``#`` comment lines and blank lines ignored.
"""

import io
import re
from pathlib import Path
from typing import IO, Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from episodic.config.constants import COMMENT_PREFIX, FIELD_SEPARATOR, TIME_DTYPE
from episodic.core.exceptions import StreamFormatError, TimeRegressionError, UnknownEventTypeError
from episodic.core.logger import setup_logger
from episodic.models.stream import EventStream

logger = setup_logger(__name__)

NAME_RE = re.compile(r"[^\s\-(),\]]+")

Source = Union[str, Path, IO[str], IO[bytes]]


class SymbolTable:
    """Dense mapping between event-type names and ids (first come, first numbered)."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: List[str] = []
        self._ids: Dict[str, int] = {}
        for name in names:
            self.intern(name)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "SymbolTable":
        return cls(names)

    def intern(self, name: str) -> int:
        """Return the id of ``name``, assigning the next id if it is new."""
        type_id = self._ids.get(name)
        if type_id is None:
            if not NAME_RE.fullmatch(name):
                raise ValueError(f"invalid event type name {name!r}")
            type_id = len(self._names)
            self._names.append(name)
            self._ids[name] = type_id
        return type_id

    def id_of(self, name: str, position: int = 0) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise UnknownEventTypeError("unknown event type", name, position) from None

    def name_of(self, type_id: int) -> str:
        return self._names[type_id]

    @property
    def names(self) -> List[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymbolTable) and self._names == other._names

    def __repr__(self) -> str:
        return f"SymbolTable({self._names!r})"


def _open_text(source: Source) -> Tuple[IO[str], Callable[[], None], Optional[str]]:
    """Return (text handle, release callback, display name)."""
    if isinstance(source, (str, Path)):
        handle = open(source, "r", encoding="utf-8")
        return handle, handle.close, str(source)
    if isinstance(source, io.TextIOBase):
        return source, lambda: None, getattr(source, "name", None)
    # Detach so the caller's binary handle stays open
    wrapper = io.TextIOWrapper(source, encoding="utf-8")
    return wrapper, wrapper.detach, getattr(source, "name", None)


def load_stream(
    source: Source,
    symbols: Optional[SymbolTable] = None,
) -> Tuple[EventStream, SymbolTable]:
    """
    Read an event file.

    Args:
        source: Path or open (text or binary) file
        symbols: Optional pre-seeded symbol table; extended in place with new names

    Returns:
        Tuple of (EventStream, SymbolTable)

    Raises:
        StreamFormatError: malformed line or non-integer time
        TimeRegressionError: a time smaller than the previous one
        OSError: the file cannot be opened
    """
    symbols = symbols if symbols is not None else SymbolTable()
    handle, release, display = _open_text(source)

    types: List[int] = []
    times: List[int] = []
    last_time = 0

    try:
        for line_no, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIX):
                continue

            fields = line.split(FIELD_SEPARATOR)
            if len(fields) != 2:
                raise StreamFormatError(f"expected '<name>,<time_ms>', got {line!r}", line_no, display)

            name, time_text = fields[0].strip(), fields[1].strip()
            try:
                time = int(time_text)
            except ValueError:
                raise StreamFormatError(f"non-integer time {time_text!r}", line_no, display) from None
            if time < 0:
                raise StreamFormatError(f"negative time {time}", line_no, display)
            if times and time < last_time:
                raise TimeRegressionError(f"time regression ({time} after {last_time})", line_no, display)
            try:
                type_id = symbols.intern(name)
            except ValueError as e:
                raise StreamFormatError(str(e), line_no, display) from None

            types.append(type_id)
            times.append(time)
            last_time = time
    finally:
        release()

    stream = EventStream(
        types=np.array(types, dtype=np.int32),
        times=np.array(times, dtype=TIME_DTYPE),
        alphabet_size=len(symbols),
    )
    logger.info(f"Loaded {len(stream)} events over {len(symbols)} types from {display or 'stream'}")
    return stream, symbols


def save_stream(stream: EventStream, symbols: SymbolTable, target: Union[str, Path, IO[str]]) -> None:
    """Write ``stream`` in the event-file format."""
    names = symbols.names
    lines = [f"{names[t]}{FIELD_SEPARATOR}{time}\n" for t, time in stream.events()]

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as f:
            f.writelines(lines)
        logger.info(f"Wrote {len(lines)} events to {target}")
    else:
        target.writelines(lines)
