"""
Level-wise Frequent Episode Miner

Apriori-style discovery: size-N candidates are joined from size-(N-1)
frequent episodes, counted, thresholded, and the loop repeats until no
episode survives or ``max_level`` is reached.

Early levels hold many short episodes and are counted one task per batch of
episodes; later levels hold few long episodes and are counted one at a time
with the counter's own internal parallelism.
"""

import json
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import pandas as pd
from pydantic import BaseModel, Field, field_validator

from episodic.config.constants import DEFAULT_MAX_LEVEL, MINING_COLUMNS
from episodic.config.settings import settings
from episodic.core.grammar import format_episode
from episodic.core.logger import setup_logger
from episodic.core.stream_io import SymbolTable
from episodic.core.type_index import build_index
from episodic.counters.base import EpisodeCounter
from episodic.counters.fsm import FsmCounter
from episodic.models.episode import Episode, IntervalConstraint
from episodic.models.stream import EventStream, TypeIndex
from episodic.parallel.pool import WorkerPool

logger = setup_logger(__name__)

# Batches per worker when counting one task per group of episodes
_BATCHES_PER_WORKER = 4


class MiningConfig(BaseModel):
    """Level-wise mining parameters."""

    threshold: int = Field(ge=1)
    constraint_alphabet: Tuple[IntervalConstraint, ...]
    max_level: int = Field(default=DEFAULT_MAX_LEVEL, ge=1)
    strategy_switch_level: int = Field(default_factory=lambda: settings.strategy_switch_level, ge=1)

    @field_validator("constraint_alphabet")
    @classmethod
    def _non_empty(cls, value: Tuple[IntervalConstraint, ...]) -> Tuple[IntervalConstraint, ...]:
        if not value:
            raise ValueError("constraint_alphabet must not be empty")
        # Order-preserving dedup
        return tuple(dict.fromkeys(value))


@dataclass
class LevelResult:
    """Frequent episodes of one level."""

    level: int
    candidates: int
    frequent: List[Tuple[Episode, int]] = field(default_factory=list)
    elapsed_ms: float = 0.0
    parallelism: str = "episodes"


@dataclass
class MiningReport:
    """Per-level mining output."""

    levels: List[LevelResult] = field(default_factory=list)
    threshold: int = 1
    counter: Dict = field(default_factory=dict)

    def frequent_at(self, level: int) -> List[Tuple[Episode, int]]:
        for result in self.levels:
            if result.level == level:
                return result.frequent
        return []

    def all_frequent(self) -> List[Tuple[Episode, int]]:
        return [pair for result in self.levels for pair in result.frequent]


def seed_candidates(alphabet_size: int) -> List[Episode]:
    """Level-1 candidates: every event type of the alphabet."""
    return [Episode.single(t) for t in range(alphabet_size)]


def generate_candidates(
    frequent: Iterable[Episode],
    constraint_alphabet: Sequence[IntervalConstraint],
) -> Set[Episode]:
    """
    Join size-(N-1) frequent episodes into size-N candidates.

    A candidate is kept iff its (N-1)-prefix and (N-1)-suffix, types and
    constraints both, are frequent. 1-node episodes carry no constraint, so
    level-2 candidates take every constraint of the alphabet.

    Args:
        frequent: Frequent episodes, all of the same size
        constraint_alphabet: Constraints allowed between consecutive events

    Returns:
        Set of candidate episodes (empty for empty input)
    """
    frequent = list(frequent)
    if not frequent:
        return set()

    sizes = {episode.size for episode in frequent}
    if len(sizes) != 1:
        raise ValueError(f"frequent episodes must share one size, got sizes {sorted(sizes)}")

    if sizes.pop() == 1:
        return {
            left.extend(constraint, right.types[0])
            for left in frequent
            for right in frequent
            for constraint in constraint_alphabet
        }

    by_prefix: Dict[Episode, List[Episode]] = defaultdict(list)
    for episode in frequent:
        by_prefix[episode.prefix()].append(episode)

    candidates: Set[Episode] = set()
    for left in frequent:
        for right in by_prefix.get(left.suffix(), ()):
            candidates.add(left.extend(right.constraints[-1], right.types[-1]))
    return candidates


@dataclass
class _CountTask:
    stream: EventStream
    index: TypeIndex
    counter: EpisodeCounter
    episodes: List[Episode]


def _count_batch(task: _CountTask) -> List[int]:
    return [task.counter.count(task.stream, task.index, episode) for episode in task.episodes]


def count_many(
    stream: EventStream,
    index: TypeIndex,
    episodes: Sequence[Episode],
    counter: EpisodeCounter,
    pool: Optional[WorkerPool] = None,
) -> List[int]:
    """
    Count many episodes, one pool task per batch of episodes.

    Inside a task the counter never fans out, so nested pools cannot
    starve each other.

    Args:
        stream: Event stream
        index: Type index of ``stream``
        episodes: Episodes to count
        counter: Counting backend
        pool: Worker pool (thread or process); inline when omitted

    Returns:
        Counts in the order of ``episodes``
    """
    episodes = list(episodes)
    if not episodes:
        return []

    serial = counter.single_worker()
    if pool is None or pool.workers == 1:
        return _count_batch(_CountTask(stream, index, serial, episodes))

    batch = max(1, math.ceil(len(episodes) / (pool.workers * _BATCHES_PER_WORKER)))
    tasks = [
        _CountTask(stream, index, serial, episodes[start:start + batch])
        for start in range(0, len(episodes), batch)
    ]
    results = pool.map_ordered(_count_batch, tasks)
    return [count for chunk in results for count in chunk]


def mine(
    stream: EventStream,
    config: MiningConfig,
    counter: Optional[EpisodeCounter] = None,
    index: Optional[TypeIndex] = None,
    pool: Optional[WorkerPool] = None,
) -> MiningReport:
    """
    Level-wise frequent episode discovery.

    Args:
        stream: Event stream
        config: Mining parameters
        counter: Counting backend (default: state machine)
        index: Type index of ``stream`` (built when omitted)
        pool: Pool for per-episode counting below the switch level
            (default: ``settings.executor`` with ``settings.workers``)

    Returns:
        MiningReport with one LevelResult per counted level
    """
    counter = counter or FsmCounter()
    index = index or build_index(stream)
    owns_pool = pool is None
    pool = pool or WorkerPool(kind=settings.executor)

    report = MiningReport(threshold=config.threshold, counter=counter.describe())
    candidates: List[Episode] = seed_candidates(stream.alphabet_size)

    try:
        for level in range(1, config.max_level + 1):
            if not candidates:
                break

            started = time.perf_counter()
            if level < config.strategy_switch_level:
                counts = count_many(stream, index, candidates, counter, pool)
                parallelism = "episodes"
            else:
                counts = [counter.count(stream, index, episode) for episode in candidates]
                parallelism = "tracking"

            frequent = sorted(
                ((episode, count) for episode, count in zip(candidates, counts) if count >= config.threshold),
                key=lambda pair: pair[0].sort_key(),
            )
            result = LevelResult(
                level=level,
                candidates=len(candidates),
                frequent=frequent,
                elapsed_ms=(time.perf_counter() - started) * 1000,
                parallelism=parallelism,
            )
            report.levels.append(result)

            logger.info(
                f"Level {level}: {len(frequent)}/{len(candidates)} frequent in {result.elapsed_ms:.1f}ms",
                extra={"level_n": level, "elapsed_ms": round(result.elapsed_ms, 3), "count": len(frequent)},
            )

            if not frequent:
                break
            candidates = sorted(
                generate_candidates((episode for episode, _ in frequent), config.constraint_alphabet),
                key=Episode.sort_key,
            )
    finally:
        if owns_pool:
            pool.close()

    return report


def report_frame(report: MiningReport, symbols: SymbolTable) -> pd.DataFrame:
    """Mining report as a ``level,episode,count`` table."""
    rows = [
        (result.level, format_episode(episode, symbols), count)
        for result in report.levels
        for episode, count in result.frequent
    ]
    return pd.DataFrame(rows, columns=MINING_COLUMNS)


def write_report_csv(report: MiningReport, symbols: SymbolTable, target: Union[str, Path, IO[str]]) -> None:
    report_frame(report, symbols).to_csv(target, index=False)


def report_summary(report: MiningReport) -> dict:
    """JSON-ready summary: per-level candidate and frequent counts with timings."""
    return {
        "threshold": report.threshold,
        "counter": report.counter,
        "levels": [
            {
                "level": result.level,
                "candidates": result.candidates,
                "frequent": len(result.frequent),
                "elapsed_ms": round(result.elapsed_ms, 3),
                "parallelism": result.parallelism,
            }
            for result in report.levels
        ],
        "total_frequent": len(report.all_frequent()),
        "total_elapsed_ms": round(sum(result.elapsed_ms for result in report.levels), 3),
    }


def write_report_summary(report: MiningReport, target: Union[str, Path, IO[str]]) -> None:
    payload = json.dumps(report_summary(report), indent=2)
    if isinstance(target, (str, Path)):
        Path(target).write_text(payload + "\n")
    else:
        target.write(payload + "\n")
