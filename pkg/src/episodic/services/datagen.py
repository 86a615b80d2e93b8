"""
Synthetic Spike-Train Generator

Poisson background firing across M neurons plus directly injected
occurrences of embedded episodes, with a ground-truth injection log.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from episodic.config.constants import (
    DEFAULT_BASE_RATE_HZ,
    DEFAULT_EMBED_RATE_HZ,
    DEFAULT_NEURONS,
    NEURON_NAME_PREFIX,
    TIME_DTYPE,
    TRUTH_COLUMNS,
)
from episodic.core.exceptions import ConfigurationError
from episodic.core.grammar import format_episode, parse_episode
from episodic.core.logger import setup_logger
from episodic.core.stream_io import SymbolTable
from episodic.models.episode import Episode, IntervalConstraint
from episodic.models.occurrence import OccurrenceInterval
from episodic.models.stream import EventStream

logger = setup_logger(__name__)


class EmbeddedEpisode(BaseModel):
    """Episode injected at its own Poisson rate."""

    episode: Episode
    rate_hz: float = Field(default=DEFAULT_EMBED_RATE_HZ, gt=0)

    model_config = ConfigDict(frozen=True)


class GenConfig(BaseModel):
    """Generator configuration."""

    neurons: int = Field(default=DEFAULT_NEURONS, ge=1)
    duration_s: float = Field(default=100.0, ge=0)
    base_rate_hz: float = Field(default=DEFAULT_BASE_RATE_HZ, gt=0)
    embedded: List[EmbeddedEpisode] = Field(default_factory=list)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_embedded(self) -> "GenConfig":
        for item in self.embedded:
            if max(item.episode.types) >= self.neurons:
                raise ValueError(f"embedded episode uses a neuron id >= {self.neurons}")
        return self


@dataclass
class InjectedOccurrence:
    """One injected occurrence: its interval and the event times per position."""

    start: int
    end: int
    times: Tuple[int, ...]

    @property
    def interval(self) -> OccurrenceInterval:
        return OccurrenceInterval(self.start, self.end)


@dataclass
class GeneratedDataset:
    """Generator output."""

    stream: EventStream
    symbols: SymbolTable
    injections: Dict[Episode, List[InjectedOccurrence]] = field(default_factory=dict)
    background_events: int = 0

    def truth_intervals(self, episode: Episode) -> List[OccurrenceInterval]:
        return [occ.interval for occ in self.injections.get(episode, [])]


def neuron_symbols(neurons: int) -> SymbolTable:
    """Neuron i is named E{i+1}; ids equal neuron indices."""
    return SymbolTable.from_names(f"{NEURON_NAME_PREFIX}{i + 1}" for i in range(neurons))


def make_embedded_episodes(
    neurons: int,
    count: int = 4,
    size: int = 9,
    constraint: IntervalConstraint = IntervalConstraint(low=5, high=10),
    rate_hz: float = DEFAULT_EMBED_RATE_HZ,
    seed: Optional[int] = None,
) -> List[EmbeddedEpisode]:
    """Random serial episodes over distinct neurons, all gaps drawn from ``constraint``."""
    rng = np.random.default_rng(seed)
    size = min(size, neurons)
    embedded = []
    for _ in range(count):
        types = tuple(int(t) for t in rng.choice(neurons, size=size, replace=False))
        episode = Episode(types=types, constraints=(constraint,) * (size - 1))
        embedded.append(EmbeddedEpisode(episode=episode, rate_hz=rate_hz))
    return embedded


def generate(config: GenConfig) -> GeneratedDataset:
    """
    Generate a spike train.

    Background spikes of every neuron form a homogeneous Poisson process at
    ``base_rate_hz``. Each embedded episode gets occurrence start times from
    its own Poisson process; consecutive events follow after gaps drawn
    uniformly from the integers of each constraint's (low, high]. Occurrences
    that would end at or past the duration are dropped. Timestamps are
    quantized to ms; simultaneous events are ordered by neuron id.

    Args:
        config: Generator configuration

    Returns:
        GeneratedDataset with the stream and the injection log
    """
    rng = np.random.default_rng(config.seed)
    duration_ms = int(round(config.duration_s * 1000))

    counts = rng.poisson(config.base_rate_hz * config.duration_s, size=config.neurons)
    types = [np.repeat(np.arange(config.neurons, dtype=np.int32), counts)]
    times = [np.floor(rng.uniform(0, duration_ms, size=int(counts.sum()))).astype(TIME_DTYPE)]
    background = int(counts.sum())

    injections: Dict[Episode, List[InjectedOccurrence]] = {}
    for item in config.embedded:
        episode = item.episode
        m = int(rng.poisson(item.rate_hz * config.duration_s))
        starts = np.sort(np.floor(rng.uniform(0, duration_ms, size=m)).astype(TIME_DTYPE))

        columns = [starts]
        for constraint in episode.constraints:
            gaps = rng.integers(constraint.low + 1, constraint.high + 1, size=m, dtype=TIME_DTYPE)
            columns.append(columns[-1] + gaps)
        occ_times = np.stack(columns, axis=1)
        occ_times = occ_times[occ_times[:, -1] < duration_ms]

        for k, type_id in enumerate(episode.types):
            types.append(np.full(len(occ_times), type_id, dtype=np.int32))
            times.append(occ_times[:, k])

        injections.setdefault(episode, []).extend(
            InjectedOccurrence(int(row[0]), int(row[-1]), tuple(int(t) for t in row))
            for row in occ_times
        )
        logger.info(f"Injected {len(occ_times)} occurrences of a {episode.size}-node episode")

    all_types = np.concatenate(types)
    all_times = np.concatenate(times)
    order = np.lexsort((all_types, all_times))
    stream = EventStream(types=all_types[order], times=all_times[order], alphabet_size=config.neurons)

    logger.info(
        f"Generated {len(stream)} events ({background} background) "
        f"over {config.duration_s}s for {config.neurons} neurons"
    )
    return GeneratedDataset(
        stream=stream,
        symbols=neuron_symbols(config.neurons),
        injections=injections,
        background_events=background,
    )


def parse_embed_spec(text: str, symbols: SymbolTable) -> EmbeddedEpisode:
    """Parse ``EPISODE[:RATE_HZ]``, e.g. ``E1-(5,10]-E2:1.0``."""
    episode_text, sep, rate_text = text.rpartition(":")
    if not sep:
        episode_text, rate_text = text, ""
    try:
        rate = float(rate_text) if rate_text.strip() else DEFAULT_EMBED_RATE_HZ
    except ValueError:
        raise ConfigurationError(f"invalid injection rate {rate_text!r} in {text!r}") from None
    return EmbeddedEpisode(episode=parse_episode(episode_text, symbols), rate_hz=rate)


def truth_path(data_path: Union[str, Path]) -> Path:
    """``FILE`` -> ``FILE.truth.csv``."""
    data_path = Path(data_path)
    return data_path.with_name(data_path.name + ".truth.csv")


def save_truth_log(dataset: GeneratedDataset, target: Union[str, Path]) -> None:
    """Write the injection log as CSV (episode,start,end)."""
    rows = [
        (format_episode(episode, dataset.symbols), occ.start, occ.end)
        for episode, occurrences in dataset.injections.items()
        for occ in occurrences
    ]
    pd.DataFrame(rows, columns=TRUTH_COLUMNS).to_csv(target, index=False)
    logger.info(f"Wrote {len(rows)} injection records to {target}")


def load_truth_log(source: Union[str, Path], symbols: SymbolTable) -> Dict[Episode, List[OccurrenceInterval]]:
    """Read an injection log written by ``save_truth_log``."""
    frame = pd.read_csv(source)
    log: Dict[Episode, List[OccurrenceInterval]] = {}
    for text, start, end in frame[TRUTH_COLUMNS].itertuples(index=False):
        log.setdefault(parse_episode(text, symbols), []).append(OccurrenceInterval(int(start), int(end)))
    return log
