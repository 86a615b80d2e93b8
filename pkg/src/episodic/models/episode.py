"""Pydantic models for serial episodes."""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, model_validator


class IntervalConstraint(BaseModel):
    """Half-open inter-event gap bound: a gap g is admitted iff low < g <= high."""

    low: int
    high: int

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_bounds(self) -> "IntervalConstraint":
        if self.low < 0:
            raise ValueError(f"low must be >= 0, got {self.low}")
        if self.low >= self.high:
            raise ValueError(f"empty interval ({self.low},{self.high}]")
        return self

    def admits(self, gap: int) -> bool:
        return self.low < gap <= self.high

    def __str__(self) -> str:
        return f"({self.low},{self.high}]"


class Episode(BaseModel):
    """Ordered tuple of event types with N-1 inter-event constraints.

    Repeated types are allowed; the two positions of ``A -> A`` always bind
    distinct events because every admitted gap is strictly positive.
    """

    types: Tuple[int, ...]
    constraints: Tuple[IntervalConstraint, ...] = ()

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_shape(self) -> "Episode":
        if not self.types:
            raise ValueError("episode needs at least one event type")
        if any(t < 0 for t in self.types):
            raise ValueError("event type ids must be non-negative")
        if len(self.constraints) != len(self.types) - 1:
            raise ValueError(
                f"{len(self.types)}-node episode needs {len(self.types) - 1} constraints, "
                f"got {len(self.constraints)}"
            )
        return self

    @classmethod
    def single(cls, type_id: int) -> "Episode":
        return cls(types=(type_id,), constraints=())

    @property
    def size(self) -> int:
        return len(self.types)

    @property
    def max_span(self) -> int:
        """Largest possible end - start of an occurrence (sum of upper bounds)."""
        return sum(c.high for c in self.constraints)

    @property
    def min_span(self) -> int:
        """Occurrences span strictly more than this (sum of lower bounds)."""
        return sum(c.low for c in self.constraints)

    def prefix(self) -> "Episode":
        """Episode without its last node."""
        return Episode(types=self.types[:-1], constraints=self.constraints[:-1])

    def suffix(self) -> "Episode":
        """Episode without its first node."""
        return Episode(types=self.types[1:], constraints=self.constraints[1:])

    def extend(self, constraint: IntervalConstraint, type_id: int) -> "Episode":
        """Append one node reached through ``constraint``."""
        return Episode(types=self.types + (type_id,), constraints=self.constraints + (constraint,))

    def sort_key(self) -> tuple:
        return (self.types, tuple((c.low, c.high) for c in self.constraints))
