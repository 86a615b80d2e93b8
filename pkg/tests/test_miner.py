"""Level-wise frequent episode miner."""

import io
import json

import pytest
from pydantic import ValidationError

from episodic.core.grammar import format_episode, parse_constraints
from episodic.core.stream_io import SymbolTable
from episodic.core.type_index import build_index
from episodic.counters import get_counter
from episodic.counters.fsm import FsmCounter
from episodic.models.episode import Episode, IntervalConstraint
from episodic.parallel.pool import WorkerPool
from episodic.services.miner import (
    MiningConfig,
    count_many,
    generate_candidates,
    mine,
    report_frame,
    report_summary,
    seed_candidates,
    write_report_summary,
)

from conftest import make_stream, random_stream

FIVE_TEN = IntervalConstraint(low=5, high=10)


@pytest.fixture
def ab():
    return SymbolTable.from_names(["A", "B"])


class TestCandidates:
    def test_suffix_prefix_join(self, episode_of):
        frequent = {episode_of("A-(5,10]-B"), episode_of("B-(5,10]-C")}

        assert generate_candidates(frequent, [FIVE_TEN]) == {episode_of("A-(5,10]-B-(5,10]-C")}

    def test_empty_input(self):
        assert generate_candidates(set(), [FIVE_TEN]) == set()

    def test_seeding(self):
        assert seed_candidates(2) == [Episode.single(0), Episode.single(1)]

    def test_level_two_takes_every_constraint(self):
        alphabet = parse_constraints("(0,5];(5,10]")
        candidates = generate_candidates(seed_candidates(2), alphabet)

        assert len(candidates) == 2 * 2 * 2
        assert Episode(types=(1, 1), constraints=(alphabet[0],)) in candidates

    def test_constraints_must_match_on_overlap(self, episode_of):
        frequent = {episode_of("A-(5,10]-B-(0,5]-C"), episode_of("B-(5,10]-C-(0,5]-D")}

        assert generate_candidates(frequent, [FIVE_TEN]) == set()

    def test_mixed_sizes_are_rejected(self, episode_of):
        with pytest.raises(ValueError):
            generate_candidates({episode_of("A"), episode_of("A-(5,10]-B")}, [FIVE_TEN])


class TestMine:
    def test_two_event_example(self, ab):
        stream = make_stream([("A", 0), ("B", 7)], ab)
        config = MiningConfig(threshold=1, constraint_alphabet=(FIVE_TEN,))

        report = mine(stream, config)

        assert [(format_episode(e, ab), c) for e, c in report.frequent_at(1)] == [("A", 1), ("B", 1)]
        assert [(format_episode(e, ab), c) for e, c in report.frequent_at(2)] == [("A-(5,10]-B", 1)]
        assert len(report.levels) == 2

    def test_threshold_above_stream_length_halts(self, ab):
        stream = make_stream([("A", 0), ("B", 7)], ab)

        report = mine(stream, MiningConfig(threshold=3, constraint_alphabet=(FIVE_TEN,)))

        assert len(report.levels) == 1
        assert report.all_frequent() == []

    def test_max_level_caps_the_search(self, ab):
        stream = make_stream([("A", 0), ("B", 7), ("A", 14)], ab)

        report = mine(stream, MiningConfig(threshold=1, constraint_alphabet=(FIVE_TEN,), max_level=2))

        assert max(result.level for result in report.levels) == 2

    def test_output_is_independent_of_the_backend(self, rng):
        stream = random_stream(rng, 400, 3, max_gap=3)
        config = MiningConfig(
            threshold=4,
            constraint_alphabet=tuple(parse_constraints("(0,5];(5,10]")),
            max_level=4,
            strategy_switch_level=2,
        )
        counters = [
            get_counter("fsm"),
            get_counter("tracking", strategy="flag", direction="fwd", workers=2),
            get_counter("tracking", strategy="append", direction="bwd", workers=2),
            get_counter("mapconcat", segments=3, workers=2),
        ]

        with WorkerPool(workers=2) as pool:
            outputs = [mine(stream, config, counter=counter, pool=pool).all_frequent() for counter in counters]

        assert outputs[0]
        for output in outputs[1:]:
            assert output == outputs[0]

    def test_frequent_episodes_have_frequent_subepisodes(self, rng):
        stream = random_stream(rng, 300, 3, max_gap=2)
        report = mine(stream, MiningConfig(threshold=3, constraint_alphabet=(IntervalConstraint(low=0, high=5),)))

        for result in report.levels[1:]:
            previous = {episode for episode, _ in report.frequent_at(result.level - 1)}
            for episode, count in result.frequent:
                assert count >= 3
                assert episode.prefix() in previous
                assert episode.suffix() in previous


def test_count_many_matches_serial_counts(rng):
    stream = random_stream(rng, 500, 3)
    index = build_index(stream)
    episodes = sorted(generate_candidates(seed_candidates(3), parse_constraints("(0,5];(2,7]")), key=Episode.sort_key)
    counter = FsmCounter()

    with WorkerPool(workers=4) as pool:
        parallel = count_many(stream, index, episodes, counter, pool)

    assert parallel == [counter.count(stream, index, e) for e in episodes]
    assert count_many(stream, index, [], counter, None) == []


def test_reports(ab):
    stream = make_stream([("A", 0), ("B", 7)], ab)
    report = mine(stream, MiningConfig(threshold=1, constraint_alphabet=(FIVE_TEN,)))

    frame = report_frame(report, ab)
    assert list(frame.columns) == ["level", "episode", "count"]
    assert frame.to_dict("records")[-1] == {"level": 2, "episode": "A-(5,10]-B", "count": 1}

    buffer = io.StringIO()
    write_report_summary(report, buffer)
    summary = json.loads(buffer.getvalue())
    assert summary == json.loads(json.dumps(report_summary(report)))
    assert [level["candidates"] for level in summary["levels"]] == [2, 4]
    assert summary["total_frequent"] == 3


@pytest.mark.parametrize(
    "kwargs",
    [
        {"threshold": 0, "constraint_alphabet": (FIVE_TEN,)},
        {"threshold": 1, "constraint_alphabet": ()},
        {"threshold": 1, "constraint_alphabet": (FIVE_TEN,), "max_level": 0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValidationError):
        MiningConfig(**kwargs)
