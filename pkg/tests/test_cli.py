"""Command-line interface."""

import io
import json

import pandas as pd
import pytest

from episodic.cli import commands
from episodic.cli.app import EXIT_DATA, EXIT_OK, EXIT_USAGE, run
from episodic.config.settings import settings
from episodic.counters.tracking import TrackingCounter
from episodic.parallel.pool import WorkerPool


@pytest.fixture
def dataset(tmp_path, capsys):
    path = tmp_path / "spikes.txt"
    code = run([
        "generate", "--out", str(path), "--neurons", "8", "--duration", "5", "--rate", "20",
        "--embed", "E1-(5,10]-E2-(5,10]-E3:10", "--seed", "1",
    ])
    capsys.readouterr()
    assert code == EXIT_OK
    return path


def _count(capsys, *args):
    code = run(["count", *args])
    out = capsys.readouterr().out
    return code, pd.read_csv(io.StringIO(out)) if code == EXIT_OK else out


def test_generate_writes_events_and_truth_log(dataset):
    truth = pd.read_csv(dataset.with_name(dataset.name + ".truth.csv"))

    assert dataset.stat().st_size > 0
    assert list(truth.columns) == ["episode", "start", "end"]
    assert (truth["episode"] == "E1-(5,10]-E2-(5,10]-E3").all()
    assert len(truth) > 0


def test_count_is_equal_across_backends(dataset, capsys):
    episode = "E1-(5,10]-E2-(5,10]-E3"
    counts = []
    for extra in (["--algo", "fsm"], ["--algo", "tracking", "--workers", "1"], ["--algo", "tracking", "--workers", "8"],
                  ["--algo", "tracking", "--strategy", "flag", "--direction", "bwd"], ["--algo", "mapconcat", "--segments", "5"]):
        code, table = _count(capsys, "--data", str(dataset), "--episode", episode, *extra)
        assert code == EXIT_OK
        assert list(table.columns) == ["episode", "count", "elapsed_ms"]
        assert table.loc[0, "episode"] == episode
        counts.append(int(table.loc[0, "count"]))

    assert len(set(counts)) == 1
    assert counts[0] > 0


def test_count_several_episodes(dataset, capsys):
    code, table = _count(capsys, "--data", str(dataset), "--episode", "E1", "--episode", "E2-(0,5]-E4")

    assert code == EXIT_OK
    assert table["episode"].tolist() == ["E1", "E2-(0,5]-E4"]


def test_oracle_backend_on_small_file(tmp_path, capsys):
    path = tmp_path / "small.txt"
    path.write_text("# two overlapping, one separate\nA,1\nA,3\nB,6\nB,8\nA,20\nB,24\n")

    code, oracle = _count(capsys, "--data", str(path), "--episode", "A-(2,5]-B", "--algo", "oracle")
    _, fsm = _count(capsys, "--data", str(path), "--episode", "A-(2,5]-B", "--algo", "fsm")

    assert code == EXIT_OK
    assert oracle.loc[0, "count"] == fsm.loc[0, "count"] == 2


def test_oracle_refuses_large_input(dataset, capsys):
    assert run(["count", "--data", str(dataset), "--episode", "E1", "--algo", "oracle"]) == EXIT_DATA
    assert "oracle limit" in capsys.readouterr().err


def test_bad_embed_rate_is_a_usage_error(tmp_path, capsys):
    code = run(["generate", "--out", str(tmp_path / "x.txt"), "--neurons", "4", "--embed", "E1-(5,10]-E2:fast"])

    assert code == EXIT_USAGE
    assert "fast" in capsys.readouterr().err


def test_missing_file_names_the_path(tmp_path, capsys):
    missing = tmp_path / "nope.txt"

    code = run(["count", "--data", str(missing), "--episode", "A", "--algo", "fsm"])

    assert code == EXIT_DATA
    assert str(missing) in capsys.readouterr().err


def test_unknown_event_type_is_a_data_error(dataset, capsys):
    assert run(["count", "--data", str(dataset), "--episode", "E1-(5,10]-X9"]) == EXIT_DATA
    assert "X9" in capsys.readouterr().err


def test_malformed_event_file_is_a_data_error(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("A,5\nA,3\n")

    assert run(["count", "--data", str(path), "--episode", "A"]) == EXIT_DATA
    assert "bad.txt:2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["count"],
        ["count", "--data", "x", "--episode", "A", "--algo", "gpu"],
        ["mine", "--data", "x", "--threshold", "0"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    assert run(argv) == EXIT_USAGE


def test_mine_with_high_threshold_is_empty(dataset, capsys):
    code = run(["mine", "--data", str(dataset), "--threshold", "1000000", "--algo", "fsm"])
    captured = capsys.readouterr()

    assert code == EXIT_OK
    assert pd.read_csv(io.StringIO(captured.out)).empty
    assert json.loads(captured.err.strip().splitlines()[-1])["total_frequent"] == 0


def test_mine_is_identical_across_backends(dataset, tmp_path, capsys):
    outputs = []
    for algo in ("fsm", "tracking"):
        prefix = tmp_path / f"mined-{algo}"
        code = run([
            "mine", "--data", str(dataset), "--threshold", "15", "--constraints", "(5,10]",
            "--max-level", "3", "--algo", algo, "--workers", "2", "--out", str(prefix),
        ])
        assert code == EXIT_OK
        outputs.append(pd.read_csv(f"{prefix}.csv"))
        assert json.loads(prefix.with_name(prefix.name + ".json").read_text())["threshold"] == 15

    pd.testing.assert_frame_equal(outputs[0], outputs[1])
    assert "E1-(5,10]-E2-(5,10]-E3" in outputs[0]["episode"].tolist()


def _mine_table(dataset, tmp_path, name, *extra):
    prefix = tmp_path / name
    code = run([
        "mine", "--data", str(dataset), "--threshold", "15", "--constraints", "(5,10]",
        "--max-level", "3", "--workers", "2", "--out", str(prefix), *extra,
    ])
    assert code == EXIT_OK
    return pd.read_csv(f"{prefix}.csv")


def test_mine_honours_process_executor(dataset, tmp_path, capsys, monkeypatch):
    kinds = []

    class RecordingPool(WorkerPool):
        def __init__(self, *args, **kwargs):
            super().__init__(*args, **kwargs)
            kinds.append(self.kind)

    threaded = _mine_table(dataset, tmp_path, "threaded", "--algo", "tracking")
    monkeypatch.setattr(commands, "WorkerPool", RecordingPool)
    monkeypatch.setattr(settings, "executor", "process")
    forked = _mine_table(dataset, tmp_path, "forked", "--algo", "tracking")

    assert kinds == ["process"]
    pd.testing.assert_frame_equal(threaded, forked)


def test_mine_closes_the_counter(dataset, tmp_path, capsys, monkeypatch):
    closed = []
    original = TrackingCounter.close

    def close(self):
        closed.append(self)
        original(self)

    monkeypatch.setattr(TrackingCounter, "close", close)

    _mine_table(dataset, tmp_path, "mined", "--algo", "tracking")

    assert len(closed) == 1
    assert closed[0]._pool is None


def test_bench_writes_table(tmp_path, capsys):
    out = tmp_path / "bench.csv"

    code = run([
        "bench", "--suite", "length", "--sizes", "2", "3", "--duration", "2", "--neurons", "8",
        "--repeats", "3", "--workers", "1", "2", "--algos", "fsm", "tracking", "--strategies", "csw",
        "--directions", "bwd", "--validate", "1", "--out", str(out),
    ])
    table = pd.read_csv(out)

    assert code == EXIT_OK
    assert len(table) == 2 * 3 * (1 + 2)
    assert table["validated"].all()
    assert (table["elapsed_ms"] >= 0).all()
