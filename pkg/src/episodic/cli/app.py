"""
Argument parsing and dispatch.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import sys
from typing import List, Optional

from episodic import __version__
from episodic.config.constants import (
    DATASET_DURATIONS_S,
    DEFAULT_BASE_RATE_HZ,
    DEFAULT_CONSTRAINTS,
    DEFAULT_EMBED_RATE_HZ,
    DEFAULT_MAX_LEVEL,
    DEFAULT_NEURONS,
)
from episodic.config.settings import settings
from episodic.counters import ALGORITHMS
from episodic.models.occurrence import CompactionStrategy, Direction
from episodic.services.benchmark import BENCH_ALGORITHMS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_STRATEGIES = [s.value for s in CompactionStrategy]
_DIRECTIONS = [d.value for d in Direction]


class UsageError(Exception):
    """Bad command-line usage (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_backend_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=ALGORITHMS, default="tracking", help="counting backend")
    parser.add_argument("--strategy", choices=_STRATEGIES, default=CompactionStrategy.COUNT_SCAN_WRITE.value,
                        help="tracking compaction strategy")
    parser.add_argument("--direction", choices=_DIRECTIONS, default=Direction.FORWARD.value,
                        help="tracking direction")
    parser.add_argument("--workers", type=_positive_int, default=settings.workers,
                        help="worker count (default: EPISODIC_WORKERS or logical cores)")
    parser.add_argument("--segments", type=_positive_int, default=settings.default_segments,
                        help="MapConcat segment count")


def create_parser() -> argparse.ArgumentParser:
    """Build the ``episodic`` argument parser."""
    parser = _Parser(prog="episodic", description="Count and mine serial episodes in event streams.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="console log level (default: EPISODIC_LOG_LEVEL)")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    generate = sub.add_parser("generate", help="generate a synthetic spike train")
    generate.add_argument("--out", required=True, help="event file to write (truth log goes to OUT.truth.csv)")
    generate.add_argument("--neurons", type=_positive_int, default=DEFAULT_NEURONS)
    generate.add_argument("--duration", type=float, default=100.0, help="duration in seconds")
    generate.add_argument("--rate", type=float, default=DEFAULT_BASE_RATE_HZ, help="background rate in Hz")
    generate.add_argument("--embed", action="append", default=[], metavar="EPISODE[:RATE]",
                          help="episode to inject, e.g. 'E1-(5,10]-E2:1.0' (repeatable)")
    generate.add_argument("--random-embed", type=int, default=0, metavar="K",
                          help="inject K random episodes over distinct neurons")
    generate.add_argument("--embed-size", type=_positive_int, default=9)
    generate.add_argument("--embed-rate", type=float, default=DEFAULT_EMBED_RATE_HZ)
    generate.add_argument("--embed-constraint", default=DEFAULT_CONSTRAINTS,
                          help="gap constraint of random episodes")
    generate.add_argument("--seed", type=int, default=None)

    count = sub.add_parser("count", help="count non-overlapped occurrences")
    count.add_argument("--data", required=True, help="event file")
    count.add_argument("--episode", action="append", required=True, help="episode text (repeatable)")
    _add_backend_options(count)

    mine = sub.add_parser("mine", help="level-wise frequent episode mining")
    mine.add_argument("--data", required=True, help="event file")
    mine.add_argument("--threshold", type=_positive_int, required=True)
    mine.add_argument("--constraints", default=DEFAULT_CONSTRAINTS, help="';'-separated constraint alphabet")
    mine.add_argument("--max-level", type=_positive_int, default=DEFAULT_MAX_LEVEL)
    mine.add_argument("--switch-level", type=_positive_int, default=settings.strategy_switch_level,
                      help="level from which episodes are counted one at a time")
    mine.add_argument("--out", default=None, metavar="PREFIX",
                      help="write PREFIX.csv and PREFIX.json (default: CSV to stdout, summary to stderr)")
    _add_backend_options(mine)

    bench = sub.add_parser("bench", help="benchmark sweeps")
    bench.add_argument("--suite", choices=["datasets", "length", "frequency"], default="length")
    bench.add_argument("--sizes", type=float, nargs="+", default=None,
                       help="durations in s (datasets; presets: "
                            + " ".join(str(d) for d in sorted(DATASET_DURATIONS_S))
                            + "), episode sizes (length) or injection rates in Hz (frequency)")
    bench.add_argument("--repeats", type=_positive_int, default=1)
    bench.add_argument("--out", default=None, help="CSV file (default: stdout)")
    bench.add_argument("--workers", type=_positive_int, nargs="+", default=[settings.workers])
    bench.add_argument("--algos", choices=BENCH_ALGORITHMS, nargs="+", default=list(BENCH_ALGORITHMS))
    bench.add_argument("--strategies", choices=_STRATEGIES, nargs="+", default=_STRATEGIES)
    bench.add_argument("--directions", choices=_DIRECTIONS, nargs="+", default=_DIRECTIONS)
    bench.add_argument("--segments", type=_positive_int, default=settings.default_segments)
    bench.add_argument("--neurons", type=_positive_int, default=DEFAULT_NEURONS)
    bench.add_argument("--duration", type=float, default=100.0, help="duration in seconds (length/frequency)")
    bench.add_argument("--episode-len", type=_positive_int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--validate", type=float, default=0.01, metavar="FRACTION",
                       help="fraction of rows re-counted with the state machine")

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and run the selected subcommand; returns the exit code."""
    from episodic.cli import commands

    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    handlers = {
        "generate": commands.cmd_generate,
        "count": commands.cmd_count,
        "mine": commands.cmd_mine,
        "bench": commands.cmd_bench,
    }
    return handlers[args.command](args)
