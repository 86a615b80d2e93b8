"""Parallel primitives - worker pools, prefix scan and compaction."""

from episodic.parallel.pool import WorkerPool, default_pool
from episodic.parallel.scan import compact_flags, count_scan_write, exclusive_scan, parallel_map_collect

__all__ = [
    "WorkerPool",
    "compact_flags",
    "count_scan_write",
    "default_pool",
    "exclusive_scan",
    "parallel_map_collect",
]
