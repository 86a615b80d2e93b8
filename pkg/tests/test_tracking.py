"""Parallel local tracking counter."""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from episodic.config.settings import settings
from episodic.core.type_index import build_index
from episodic.counters.fsm import count_fsm
from episodic.counters.tracking import (
    TrackingCounter,
    _dedup_scatter,
    count_tracking,
    find_occurrences,
    flag_slab_width,
    run_tracking,
    track_step,
)
from episodic.models.episode import Episode, IntervalConstraint
from episodic.models.occurrence import CompactionStrategy, Direction, TrackedItem, TrackedItems
from episodic.parallel.pool import WorkerPool

from conftest import random_episode, random_stream

STRATEGIES = list(CompactionStrategy)
DIRECTIONS = list(Direction)
WINDOW = IntervalConstraint(low=5, high=10)


@pytest.fixture(params=[1, 2, 8])
def pool(request):
    with WorkerPool(workers=request.param, min_chunk=1) as p:
        yield p


@pytest.fixture
def step_stream(indexed):
    return indexed([("A", 0), ("A", 3), ("B", 6), ("B", 9), ("B", 12)])


class TestTrackStep:
    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_forward_step_keeps_latest_start(self, step_stream, pool, strategy):
        stream, index = step_stream
        items = TrackedItems(index.positions[0], index.times[0])

        result = track_step(stream, index, items, 0, 1, WINDOW, Direction.FORWARD, strategy, pool)

        assert result.to_items() == [TrackedItem(2, 0), TrackedItem(3, 3), TrackedItem(4, 3)]

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_backward_step_keeps_earliest_end(self, step_stream, pool, strategy):
        stream, index = step_stream
        items = TrackedItems(index.positions[1], index.times[1])

        result = track_step(stream, index, items, 1, 0, WINDOW, Direction.BACKWARD, strategy, pool)

        # A@0 reaches B@6 and B@9; A@3 reaches B@9 and B@12
        assert result.to_items() == [TrackedItem(0, 6), TrackedItem(1, 9)]

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_empty_items(self, step_stream, pool, strategy):
        stream, index = step_stream

        assert len(track_step(stream, index, TrackedItems.empty(), 0, 1, WINDOW, strategy=strategy, pool=pool)) == 0

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_no_event_in_window(self, indexed, pool, strategy):
        stream, index = indexed([("A", 0), ("B", 3), ("B", 30)])
        items = TrackedItems(index.positions[0], index.times[0])

        assert len(track_step(stream, index, items, 0, 1, WINDOW, strategy=strategy, pool=pool)) == 0

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_seed_items_from_pairs(self, step_stream, pool, strategy):
        stream, index = step_stream
        # Only A@3 (event 1) is tracked
        items = TrackedItems.from_items([(1, 3)])

        result = track_step(stream, index, items, 0, 1, WINDOW, Direction.FORWARD, strategy, pool)

        assert result.to_items() == [TrackedItem(3, 3), TrackedItem(4, 3)]

    @hyp_settings(max_examples=50, deadline=None)
    @given(
        chains=st.lists(st.integers(0, 1_000), min_size=1, max_size=200),
        width=st.integers(1, 40),
        workers=st.sampled_from([2, 3, 8]),
        forward=st.booleans(),
    )
    def test_blockwise_dedup_matches_one_block(self, chains, width, workers, forward):
        # Overlapping rank ranges across blocks must merge to the same winners
        rng = np.random.default_rng(len(chains) * width)
        ranks = np.sort(rng.integers(0, width, size=len(chains)))
        chains = np.asarray(chains, dtype=np.int64)
        to_pos = np.arange(width, dtype=np.int64) * 2

        with WorkerPool(workers=1) as one, WorkerPool(workers=workers, min_chunk=1) as many:
            expected = _dedup_scatter(ranks, chains, to_pos, forward, one)
            result = _dedup_scatter(ranks, chains, to_pos, forward, many)

        assert result.to_items() == expected.to_items()
        reduce = max if forward else min
        assert expected.to_items() == [
            TrackedItem(int(2 * r), reduce(int(c) for k, c in zip(ranks, chains) if k == r)) for r in np.unique(ranks)
        ]


class TestFindOccurrences:
    def test_single_node_gives_point_intervals(self, indexed):
        stream, index = indexed([("A", 1), ("B", 2), ("A", 4)])

        occurrences = find_occurrences(stream, index, Episode.single(0))

        assert occurrences.to_intervals() == [(1, 1), (4, 4)]

    @pytest.mark.parametrize("direction", DIRECTIONS)
    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_three_node_example(self, indexed, episode_of, direction, strategy):
        stream, index = indexed([("A", 1), ("B", 8), ("C", 20)])
        episode = episode_of("A-(5,10]-B-(10,15]-C")

        occurrences = find_occurrences(stream, index, episode, direction, strategy)

        assert occurrences.to_intervals() == [(1, 20)]

    def test_step_sizes_are_recorded(self, step_stream, episode_of):
        stream, index = step_stream
        sizes = []

        find_occurrences(stream, index, episode_of("A-(5,10]-B"), step_sizes=sizes)

        assert sizes == [2]


class TestCounting:
    def test_forward_and_backward_agree(self, rng):
        for _ in range(200):
            stream = random_stream(rng, 150, 3)
            index = build_index(stream)
            episode = random_episode(rng, 3, int(rng.integers(1, 5)))
            expected = count_fsm(stream, episode)
            for direction in DIRECTIONS:
                assert count_tracking(stream, index, episode, direction) == expected

    def test_worker_counts_and_strategies_are_bit_identical(self, rng):
        stream = random_stream(rng, 20_000, 4, max_gap=2)
        index = build_index(stream)
        episode = random_episode(rng, 4, 4)

        reference = None
        for strategy in STRATEGIES:
            for workers in (1, 2, 4, 8):
                with WorkerPool(workers=workers, min_chunk=64) as pool:
                    occurrences = find_occurrences(stream, index, episode, Direction.FORWARD, strategy, pool)
                pair = (occurrences.starts.tobytes(), occurrences.ends.tobytes())
                reference = reference or pair
                assert pair == reference

    @pytest.mark.parametrize("direction", DIRECTIONS)
    def test_occurrences_come_out_sorted(self, rng, direction):
        stream = random_stream(rng, 5_000, 3, max_gap=3)
        index = build_index(stream)
        for size in (2, 3, 4):
            result = run_tracking(stream, index, random_episode(rng, 3, size), direction)
            assert result.sort_fallbacks == 0
            assert result.occurrences.first_unsorted() == -1

    def test_flag_slabs_spill_into_extra_rounds(self, rng, monkeypatch):
        stream = random_stream(rng, 2_000, 2, max_gap=1)
        index = build_index(stream)
        episode = random_episode(rng, 2, 3)
        expected = count_fsm(stream, episode)

        monkeypatch.setattr(settings, "flag_slab_cap", 1)
        assert flag_slab_width(index, WINDOW) == 1
        assert count_tracking(stream, index, episode, strategy=CompactionStrategy.FLAG_COMPACT) == expected

    def test_counter_accumulates_fallbacks_and_describes_itself(self, step_stream, episode_of):
        stream, index = step_stream
        counter = TrackingCounter(direction="bwd", strategy="append", workers=2)
        try:
            assert counter.count(stream, index, episode_of("A-(5,10]-B")) == 1
        finally:
            counter.close()

        assert counter.sort_fallbacks == 0
        assert counter.describe() == {"algo": "tracking", "strategy": "append", "direction": "bwd", "workers": 2}
        assert counter.single_worker().workers == 1
