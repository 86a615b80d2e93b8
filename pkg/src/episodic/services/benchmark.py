"""
Benchmark Harness

Times every counting backend over one of three sweeps and returns a
plot-ready table:

- datasets: stream size (generated durations)
- length: episode size N
- frequency: injection rate of the counted episode
"""

import time
from dataclasses import dataclass
from typing import Dict, Iterator, List, Literal, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, Field, field_validator

from episodic.config.constants import (
    BENCH_COLUMNS,
    DATASET_DURATIONS_S,
    DEFAULT_BASE_RATE_HZ,
    DEFAULT_EMBED_RATE_HZ,
    DEFAULT_NEURONS,
)
from episodic.config.settings import settings
from episodic.core.logger import setup_logger
from episodic.core.type_index import build_index
from episodic.counters.base import EpisodeCounter
from episodic.counters.fsm import FsmCounter, count_fsm
from episodic.counters.mapconcat import MapConcatCounter
from episodic.counters.tracking import TrackingCounter
from episodic.models.episode import Episode
from episodic.models.occurrence import CompactionStrategy, Direction
from episodic.models.stream import EventStream, TypeIndex
from episodic.services.datagen import GenConfig, generate, make_embedded_episodes

logger = setup_logger(__name__)

Suite = Literal["datasets", "length", "frequency"]

BENCH_ALGORITHMS = ("fsm", "tracking", "mapconcat")

DEFAULT_SIZES: Dict[str, List[float]] = {
    # Presets up to 100 s; larger ones are opt-in through sizes
    "datasets": sorted(d for d in DATASET_DURATIONS_S if d <= 100),
    "length": [2, 3, 4, 5, 6, 7, 8, 9],
    "frequency": [0.5, 1.0, 2.0, 4.0, 8.0],
}


class BenchConfig(BaseModel):
    """Benchmark sweep parameters."""

    suite: Suite = "length"
    sizes: List[float] = Field(default_factory=list)
    repeats: int = Field(default=1, ge=1)
    workers: List[int] = Field(default_factory=lambda: [settings.workers])
    algos: List[str] = Field(default_factory=lambda: list(BENCH_ALGORITHMS))
    strategies: List[CompactionStrategy] = Field(default_factory=lambda: list(CompactionStrategy))
    directions: List[Direction] = Field(default_factory=lambda: list(Direction))
    segments: int = Field(default_factory=lambda: settings.default_segments, ge=1)
    neurons: int = Field(default=DEFAULT_NEURONS, ge=1)
    base_rate_hz: float = Field(default=DEFAULT_BASE_RATE_HZ, gt=0)
    embed_rate_hz: float = Field(default=DEFAULT_EMBED_RATE_HZ, gt=0)
    duration_s: float = Field(default=100.0, gt=0)
    episode_len: int = Field(default=5, ge=1, le=9)
    validate_fraction: float = Field(default=0.01, ge=0, le=1)
    seed: int = 0

    @field_validator("algos")
    @classmethod
    def _known_algos(cls, value: List[str]) -> List[str]:
        unknown = sorted(set(value) - set(BENCH_ALGORITHMS))
        if unknown:
            raise ValueError(f"cannot benchmark {', '.join(unknown)}; expected {', '.join(BENCH_ALGORITHMS)}")
        return value

    @field_validator("workers")
    @classmethod
    def _positive_workers(cls, value: List[int]) -> List[int]:
        if not value or any(w < 1 for w in value):
            raise ValueError("worker counts must be >= 1")
        return value

    def sweep_sizes(self) -> List[float]:
        return self.sizes or DEFAULT_SIZES[self.suite]


@dataclass
class BenchCell:
    """One dataset/episode pair of a sweep."""

    stream: EventStream
    index: TypeIndex
    episode: Episode
    frequency: float


@dataclass
class _Variant:
    algo: str
    strategy: str
    direction: str
    workers: int
    counter: EpisodeCounter


def _truncate(episode: Episode, size: int) -> Episode:
    size = max(1, min(size, episode.size))
    return Episode(types=episode.types[:size], constraints=episode.constraints[: size - 1])


def _dataset(config: BenchConfig, duration_s: float, embed_rate_hz: float) -> Tuple[EventStream, Episode]:
    embedded = make_embedded_episodes(config.neurons, rate_hz=embed_rate_hz, seed=config.seed)
    data = generate(
        GenConfig(
            neurons=config.neurons,
            duration_s=duration_s,
            base_rate_hz=config.base_rate_hz,
            embedded=embedded,
            seed=config.seed,
        )
    )
    return data.stream, embedded[0].episode


def iter_cells(config: BenchConfig) -> Iterator[BenchCell]:
    """Datasets and episodes of the configured sweep, in sweep order."""
    if config.suite == "length":
        stream, episode = _dataset(config, config.duration_s, config.embed_rate_hz)
        index = build_index(stream)
        for size in config.sweep_sizes():
            yield BenchCell(stream, index, _truncate(episode, int(size)), config.embed_rate_hz)
        return

    for size in config.sweep_sizes():
        if config.suite == "datasets":
            duration, rate = float(size), config.embed_rate_hz
        else:
            duration, rate = config.duration_s, float(size)
        stream, episode = _dataset(config, duration, rate)
        yield BenchCell(stream, build_index(stream), _truncate(episode, config.episode_len), rate)


def _variants(config: BenchConfig) -> List[_Variant]:
    variants: List[_Variant] = []
    for algo in config.algos:
        if algo == "fsm":
            variants.append(_Variant("fsm", "", "", 1, FsmCounter()))
        elif algo == "tracking":
            for strategy in config.strategies:
                for direction in config.directions:
                    for workers in config.workers:
                        counter = TrackingCounter(direction=direction, strategy=strategy, workers=workers)
                        variants.append(_Variant("tracking", strategy.value, direction.value, workers, counter))
        else:
            for workers in config.workers:
                counter = MapConcatCounter(segments=config.segments, workers=workers)
                variants.append(_Variant("mapconcat", f"segments={config.segments}", "", workers, counter))
    return variants


def _validation_step(fraction: float) -> int:
    """Validate every step-th row; 0 disables validation."""
    if fraction <= 0:
        return 0
    return max(1, round(1 / fraction))


def run_benchmark(config: BenchConfig) -> pd.DataFrame:
    """
    Run the configured sweep.

    Each (cell, backend, repeat) produces one row. A deterministic subsample
    of rows is re-counted with the state machine and flagged in ``validated``;
    other rows leave it empty.

    Args:
        config: Sweep parameters

    Returns:
        DataFrame with BENCH_COLUMNS
    """
    variants = _variants(config)
    step = _validation_step(config.validate_fraction)
    rows: List[dict] = []

    try:
        for cell in iter_cells(config):
            reference: Optional[int] = None
            for variant in variants:
                for _ in range(config.repeats):
                    before = getattr(variant.counter, "sort_fallbacks", 0)
                    started = time.perf_counter()
                    count = variant.counter.count(cell.stream, cell.index, cell.episode)
                    elapsed_ms = (time.perf_counter() - started) * 1000
                    fallbacks = getattr(variant.counter, "sort_fallbacks", 0) - before

                    validated = None
                    if step and len(rows) % step == 0:
                        if reference is None:
                            reference = count_fsm(cell.stream, cell.episode)
                        validated = count == reference
                        if not validated:
                            logger.error(
                                f"Validation mismatch: {variant.algo} counted {count}, expected {reference}",
                                extra={"algo": variant.algo, "strategy": variant.strategy, "count": count},
                            )

                    rows.append(
                        {
                            "dataset_events": len(cell.stream),
                            "episode_len": cell.episode.size,
                            "frequency": cell.frequency,
                            "algo": variant.algo,
                            "strategy": variant.strategy,
                            "direction": variant.direction,
                            "workers": variant.workers,
                            "elapsed_ms": round(elapsed_ms, 3),
                            "sort_fallbacks": fallbacks,
                            "count": count,
                            "validated": validated,
                        }
                    )
                    logger.debug(
                        f"{variant.algo} {variant.strategy} {variant.direction} took {elapsed_ms:.1f}ms",
                        extra={"algo": variant.algo, "workers": variant.workers, "elapsed_ms": round(elapsed_ms, 3)},
                    )
            logger.info(f"Benchmarked {len(cell.stream)} events, episode size {cell.episode.size}")
    finally:
        for variant in variants:
            close = getattr(variant.counter, "close", None)
            if close is not None:
                close()

    return pd.DataFrame(rows, columns=BENCH_COLUMNS)
