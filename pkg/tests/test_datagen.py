"""Synthetic spike-train generator."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from episodic.core.exceptions import ConfigurationError
from episodic.core.grammar import parse_episode
from episodic.counters.fsm import count_fsm
from episodic.counters.oracle import is_occurrence, max_nonoverlap
from episodic.services.datagen import (
    GenConfig,
    generate,
    load_truth_log,
    make_embedded_episodes,
    neuron_symbols,
    parse_embed_spec,
    save_truth_log,
    truth_path,
)


@pytest.fixture(scope="module")
def embedded_dataset():
    embedded = make_embedded_episodes(16, count=2, size=5, rate_hz=2.0, seed=7)
    return generate(GenConfig(neurons=16, duration_s=20, base_rate_hz=10, embedded=embedded, seed=11))


def _locate(stream, episode, times):
    """Stream indices binding an injected occurrence (smallest increasing choice)."""
    indices, last = [], -1
    for type_id, time in zip(episode.types, times):
        candidates = np.flatnonzero((stream.types == type_id) & (stream.times == time))
        later = candidates[candidates > last]
        if not len(later):
            return None
        last = int(later[0])
        indices.append(last)
    return indices


def test_background_count_is_poisson():
    data = generate(GenConfig(neurons=64, duration_s=100, base_rate_hz=20, seed=3))
    mean = 64 * 20 * 100

    assert abs(len(data.stream) - mean) <= 4 * math.sqrt(mean)
    assert data.background_events == len(data.stream)


def test_zero_duration_gives_empty_stream():
    data = generate(GenConfig(neurons=8, duration_s=0, seed=1, embedded=make_embedded_episodes(8, count=1, size=3)))

    assert len(data.stream) == 0


def test_seeded_runs_are_reproducible():
    config = GenConfig(neurons=1, duration_s=1_000_000, base_rate_hz=1, seed=42)

    first, second = generate(config), generate(config)

    assert len(first.stream) == len(second.stream)
    np.testing.assert_array_equal(first.stream.times, second.stream.times)


def test_embedded_runs_are_reproducible(embedded_dataset):
    again = generate(
        GenConfig(
            neurons=16,
            duration_s=20,
            base_rate_hz=10,
            embedded=make_embedded_episodes(16, count=2, size=5, rate_hz=2.0, seed=7),
            seed=11,
        )
    )

    np.testing.assert_array_equal(again.stream.types, embedded_dataset.stream.types)
    np.testing.assert_array_equal(again.stream.times, embedded_dataset.stream.times)
    assert again.injections == embedded_dataset.injections


def test_stream_is_sorted_by_time_then_neuron(embedded_dataset):
    times, types = embedded_dataset.stream.times, embedded_dataset.stream.types
    order = np.lexsort((types, times))

    np.testing.assert_array_equal(order, np.arange(len(times)))


def test_every_injection_is_a_valid_occurrence(embedded_dataset):
    stream = embedded_dataset.stream
    duration_ms = 20_000
    for episode, occurrences in embedded_dataset.injections.items():
        assert occurrences
        for occ in occurrences:
            assert occ.end < duration_ms
            indices = _locate(stream, episode, occ.times)
            assert indices is not None
            assert is_occurrence(stream, episode, indices)


def test_noise_only_adds_occurrences(embedded_dataset):
    for episode in embedded_dataset.injections:
        truth = embedded_dataset.truth_intervals(episode)
        assert count_fsm(embedded_dataset.stream, episode) >= max_nonoverlap(truth)


def test_truth_log_round_trip(embedded_dataset, tmp_path):
    path = truth_path(tmp_path / "events.txt")
    save_truth_log(embedded_dataset, path)

    log = load_truth_log(path, embedded_dataset.symbols)

    assert path.name == "events.txt.truth.csv"
    assert set(log) == set(embedded_dataset.injections)
    for episode, intervals in log.items():
        assert intervals == embedded_dataset.truth_intervals(episode)


def test_random_embedded_episodes_use_distinct_neurons():
    embedded = make_embedded_episodes(64, count=4, size=9, seed=5)

    assert len(embedded) == 4
    for item in embedded:
        assert item.episode.size == 9
        assert len(set(item.episode.types)) == 9
        assert all(str(c) == "(5,10]" for c in item.episode.constraints)


def test_parse_embed_spec():
    symbols = neuron_symbols(4)

    item = parse_embed_spec("E1-(5,10]-E4:2.5", symbols)
    assert item.episode == parse_episode("E1-(5,10]-E4", symbols)
    assert item.rate_hz == 2.5
    assert parse_embed_spec("E2", symbols).rate_hz == 1.0

    with pytest.raises(ConfigurationError):
        parse_embed_spec("E1-(5,10]-E4:fast", symbols)


def test_config_rejects_unknown_neuron():
    symbols = neuron_symbols(4)
    embedded = [parse_embed_spec("E1-(5,10]-E4", symbols)]

    with pytest.raises(ValidationError):
        GenConfig(neurons=3, embedded=embedded)
