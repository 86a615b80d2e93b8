"""
Centralized domain constants.

Single point of truth for values shared by the counters, the generator,
the miner and the CLI.
"""

# ==============================================================================
# EVENT STREAMS
# ==============================================================================

# Lines starting with this prefix are ignored by the event-file reader
COMMENT_PREFIX = "#"

# Separator between type name and timestamp in the event-file format
FIELD_SEPARATOR = ","

# Timestamps are integer milliseconds held in int64 arrays
TIME_DTYPE = "int64"

# Sentinel below every valid timestamp (timestamps are >= 0)
TIME_SENTINEL = -1

# ==============================================================================
# PARALLEL PRIMITIVES
# ==============================================================================

# Scan accumulators are unsigned 64-bit
ACCUMULATOR_MAX = 2**64 - 1

# ==============================================================================
# SYNTHETIC DATASETS (multi-electrode array setup)
# ==============================================================================

DEFAULT_NEURONS = 64
DEFAULT_BASE_RATE_HZ = 20.0
DEFAULT_EMBED_RATE_HZ = 1.0
NEURON_NAME_PREFIX = "E"

# Durations (seconds) of the eight reference datasets, largest first
DATASET_DURATIONS_S = [4000, 2000, 1000, 500, 200, 100, 50, 20]

# ==============================================================================
# MINING
# ==============================================================================

DEFAULT_CONSTRAINTS = "(5,10]"
DEFAULT_MAX_LEVEL = 9

# ==============================================================================
# REPORTS
# ==============================================================================

COUNT_COLUMNS = ["episode", "count", "elapsed_ms"]
MINING_COLUMNS = ["level", "episode", "count"]
TRUTH_COLUMNS = ["episode", "start", "end"]
BENCH_COLUMNS = [
    "dataset_events",
    "episode_len",
    "frequency",
    "algo",
    "strategy",
    "direction",
    "workers",
    "elapsed_ms",
    "sort_fallbacks",
    "count",
    "validated",
]
