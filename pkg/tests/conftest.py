"""Shared fixtures: seeded generators, symbol tables and small streams."""

from typing import Iterable, List, Sequence, Tuple

import numpy as np
import pytest

from episodic.core.grammar import parse_episode
from episodic.core.stream_io import SymbolTable
from episodic.core.type_index import build_index
from episodic.models.episode import Episode, IntervalConstraint
from episodic.models.stream import EventStream

SMALL_CONSTRAINTS = (
    IntervalConstraint(low=0, high=5),
    IntervalConstraint(low=5, high=10),
    IntervalConstraint(low=2, high=7),
)


def make_stream(events: Iterable[Tuple[str, int]], symbols: SymbolTable) -> EventStream:
    """Stream from (name, time) pairs; names must already be in ``symbols``."""
    return EventStream.from_events(
        ((symbols.id_of(name), time) for name, time in events),
        alphabet_size=len(symbols),
    )


def random_stream(
    rng: np.random.Generator,
    n_events: int,
    alphabet_size: int,
    max_gap: int = 4,
) -> EventStream:
    """Dense random stream with ties (gap 0) and short gaps."""
    gaps = rng.integers(0, max_gap + 1, size=n_events)
    times = np.cumsum(gaps)
    types = rng.integers(0, alphabet_size, size=n_events)
    return EventStream(types=types, times=times, alphabet_size=alphabet_size)


def random_episode(
    rng: np.random.Generator,
    alphabet_size: int,
    size: int,
    constraints: Sequence[IntervalConstraint] = SMALL_CONSTRAINTS,
) -> Episode:
    types = tuple(int(t) for t in rng.integers(0, alphabet_size, size=size))
    chosen = tuple(constraints[int(i)] for i in rng.integers(0, len(constraints), size=size - 1))
    return Episode(types=types, constraints=chosen)


def random_instance(seed: int) -> Tuple[EventStream, Episode]:
    """Small random (stream, episode) pair: <= 200 events, <= 6 types, 1-4 nodes."""
    rng = np.random.default_rng(seed)
    alphabet_size = int(rng.integers(1, 7))
    n_events = int(rng.integers(0, 201))
    stream = random_stream(rng, n_events, alphabet_size, max_gap=int(rng.integers(1, 6)))
    episode = random_episode(rng, alphabet_size, int(rng.integers(1, 5)))
    return stream, episode


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def symbols() -> SymbolTable:
    return SymbolTable.from_names(["A", "B", "C", "D"])


@pytest.fixture
def episode_of(symbols):
    """Parse episode text against the ``symbols`` fixture."""

    def parse(text: str) -> Episode:
        return parse_episode(text, symbols)

    return parse


@pytest.fixture
def stream_of(symbols):
    """Build a stream from (name, time) pairs against the ``symbols`` fixture."""

    def build(events: List[Tuple[str, int]]) -> EventStream:
        return make_stream(events, symbols)

    return build


@pytest.fixture
def indexed(stream_of):
    """(stream, index) from (name, time) pairs."""

    def build(events: List[Tuple[str, int]]):
        stream = stream_of(events)
        return stream, build_index(stream)

    return build
