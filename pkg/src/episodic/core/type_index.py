"""Per-type position index (the preprocessing step of parallel tracking)."""

import numpy as np

from episodic.core.logger import setup_logger
from episodic.models.stream import EventStream, TypeIndex

logger = setup_logger(__name__)


def build_index(stream: EventStream) -> TypeIndex:
    """
    Note the positions of every event type.

    Args:
        stream: Event stream

    Returns:
        TypeIndex where positions[t] lists the indices of type t in ascending
        order, with the matching timestamps alongside
    """
    # Stable sort keeps indices ascending inside each type bucket
    order = np.argsort(stream.types, kind="stable").astype(np.int64)
    bounds = np.searchsorted(stream.types[order], np.arange(stream.alphabet_size + 1))

    positions = []
    times = []
    max_multiplicity = 1 if len(stream) else 0
    for type_id in range(stream.alphabet_size):
        idx = order[bounds[type_id]:bounds[type_id + 1]]
        idx.setflags(write=False)
        type_times = stream.times[idx]
        type_times.setflags(write=False)
        positions.append(idx)
        times.append(type_times)
        if len(type_times) > 1:
            _, runs = np.unique(type_times, return_counts=True)
            max_multiplicity = max(max_multiplicity, int(runs.max()))

    logger.debug(f"Indexed {len(stream)} events, max same-time multiplicity {max_multiplicity}")
    return TypeIndex(positions=tuple(positions), times=tuple(times), max_multiplicity=max_multiplicity)
