"""
Subcommand implementations.

Each command returns an exit code. Failures print a one-line diagnostic to
stderr and are reported to GlitchTip when monitoring is enabled.
"""

import argparse
import functools
import json
import sys
import time
from pathlib import Path
from typing import Callable

import pandas as pd
from pydantic import ValidationError

from episodic.cli.app import EXIT_DATA, EXIT_OK, EXIT_USAGE, UsageError
from episodic.config.constants import COUNT_COLUMNS
from episodic.config.settings import settings
from episodic.core.exceptions import ConfigurationError, EpisodicError
from episodic.core.grammar import format_episode, parse_constraints, parse_episode
from episodic.core.logger import set_console_level, setup_logger
from episodic.core.monitoring import capture_exception, set_run_context
from episodic.core.stream_io import load_stream, save_stream
from episodic.core.type_index import build_index
from episodic.counters import get_counter
from episodic.models.occurrence import CompactionStrategy, Direction
from episodic.parallel.pool import WorkerPool
from episodic.services.benchmark import BenchConfig, run_benchmark
from episodic.services.datagen import (
    GenConfig,
    generate,
    make_embedded_episodes,
    neuron_symbols,
    parse_embed_spec,
    save_truth_log,
    truth_path,
)
from episodic.services.miner import MiningConfig, mine, report_summary, write_report_csv, write_report_summary

logger = setup_logger(__name__)


def _guarded(command: str) -> Callable:
    """Map exceptions of a command to exit codes and diagnostics."""

    def decorator(fn: Callable[[argparse.Namespace], int]) -> Callable[[argparse.Namespace], int]:
        @functools.wraps(fn)
        def wrapper(args: argparse.Namespace) -> int:
            if args.log_level:
                set_console_level(args.log_level)
            set_run_context(command, **{k: v for k, v in vars(args).items() if k in ("algo", "strategy", "workers")})

            try:
                return fn(args)
            except (UsageError, ConfigurationError, ValidationError) as e:
                print(f"episodic {command}: error: {e}", file=sys.stderr)
                return EXIT_USAGE
            except OSError as e:
                path = e.filename or getattr(args, "data", None) or ""
                print(f"episodic {command}: error: cannot access {path}: {e.strerror or e}", file=sys.stderr)
                capture_exception(e, context={"command": command, "path": str(path)})
                return EXIT_DATA
            except EpisodicError as e:
                where = f" ({args.data})" if getattr(args, "data", None) else ""
                print(f"episodic {command}: error{where}: {e}", file=sys.stderr)
                capture_exception(e, context={"command": command}, level="warning")
                return EXIT_DATA
            except Exception as e:
                logger.error(f"Unexpected error in {command}: {e}", exc_info=True)
                print(f"episodic {command}: unexpected error: {e}", file=sys.stderr)
                capture_exception(e, context={"command": command})
                return EXIT_DATA

        return wrapper

    return decorator


def _counter_from_args(args: argparse.Namespace):
    return get_counter(
        args.algo,
        strategy=CompactionStrategy(args.strategy),
        direction=Direction(args.direction),
        workers=args.workers,
        segments=args.segments,
    )


@_guarded("generate")
def cmd_generate(args: argparse.Namespace) -> int:
    """Generate a spike train and its injection log."""
    if args.random_embed < 0:
        raise UsageError("--random-embed must be >= 0")

    symbols = neuron_symbols(args.neurons)
    embedded = [parse_embed_spec(text, symbols) for text in args.embed]
    if args.random_embed:
        constraint = parse_constraints(args.embed_constraint)[0]
        embedded += make_embedded_episodes(
            args.neurons,
            count=args.random_embed,
            size=args.embed_size,
            constraint=constraint,
            rate_hz=args.embed_rate,
            seed=args.seed,
        )

    config = GenConfig(
        neurons=args.neurons,
        duration_s=args.duration,
        base_rate_hz=args.rate,
        embedded=embedded,
        seed=args.seed,
    )
    dataset = generate(config)

    save_stream(dataset.stream, dataset.symbols, args.out)
    save_truth_log(dataset, truth_path(args.out))

    for item in embedded:
        injected = len(dataset.injections.get(item.episode, []))
        print(f"{format_episode(item.episode, symbols)},{injected}")
    print(f"wrote {len(dataset.stream)} events to {args.out}", file=sys.stderr)
    return EXIT_OK


@_guarded("count")
def cmd_count(args: argparse.Namespace) -> int:
    """Count each ``--episode`` and print ``episode,count,elapsed_ms`` rows."""
    stream, symbols = load_stream(args.data)
    episodes = [parse_episode(text, symbols) for text in args.episode]
    index = build_index(stream)
    counter = _counter_from_args(args)

    rows = []
    try:
        for episode in episodes:
            started = time.perf_counter()
            count = counter.count(stream, index, episode)
            elapsed_ms = (time.perf_counter() - started) * 1000
            rows.append((format_episode(episode, symbols), count, round(elapsed_ms, 3)))
            logger.info(
                f"Counted {count} occurrences",
                extra={"episode": rows[-1][0], "count": count, "elapsed_ms": rows[-1][2], **counter.describe()},
            )
    finally:
        close = getattr(counter, "close", None)
        if close is not None:
            close()

    pd.DataFrame(rows, columns=COUNT_COLUMNS).to_csv(sys.stdout, index=False)
    return EXIT_OK


@_guarded("mine")
def cmd_mine(args: argparse.Namespace) -> int:
    """Level-wise mining; CSV report plus JSON summary."""
    config = MiningConfig(
        threshold=args.threshold,
        constraint_alphabet=tuple(parse_constraints(args.constraints)),
        max_level=args.max_level,
        strategy_switch_level=args.switch_level,
    )
    stream, symbols = load_stream(args.data)
    counter = _counter_from_args(args)

    try:
        with WorkerPool(workers=args.workers, kind=settings.executor) as pool:
            report = mine(stream, config, counter=counter, pool=pool)
    finally:
        close = getattr(counter, "close", None)
        if close is not None:
            close()

    if args.out:
        prefix = Path(args.out)
        write_report_csv(report, symbols, prefix.with_name(prefix.name + ".csv"))
        write_report_summary(report, prefix.with_name(prefix.name + ".json"))
    else:
        write_report_csv(report, symbols, sys.stdout)
        print(json.dumps(report_summary(report)), file=sys.stderr)
    return EXIT_OK


@_guarded("bench")
def cmd_bench(args: argparse.Namespace) -> int:
    """Run a benchmark sweep and write the timing table."""
    config = BenchConfig(
        suite=args.suite,
        sizes=args.sizes or [],
        repeats=args.repeats,
        workers=args.workers,
        algos=args.algos,
        strategies=args.strategies,
        directions=args.directions,
        segments=args.segments,
        neurons=args.neurons,
        duration_s=args.duration,
        episode_len=args.episode_len,
        validate_fraction=args.validate,
        seed=args.seed,
    )
    table = run_benchmark(config)
    table.to_csv(args.out if args.out else sys.stdout, index=False)

    failed = table["validated"].eq(False).sum()
    if failed:
        print(f"episodic bench: {failed} validated rows disagree with the state machine", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK
