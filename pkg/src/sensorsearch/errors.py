"""Exception types shared across the engine.

Every error raised on a user-supplied input derives from SensorSearchError
so the HTTP layer and the CLI can map the whole family to one failure shape.
"""

from __future__ import annotations


class SensorSearchError(Exception):
    """Base class for all engine errors."""


class SchemaError(SensorSearchError):
    """A property schema violates its invariants."""


class MalformedRow(SensorSearchError):
    """A catalog row could not be parsed; the whole load is rejected."""

    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class DuplicateId(SensorSearchError):
    """Two catalog rows share a sensor id."""

    def __init__(self, sensor_id: str):
        super().__init__(f"duplicate sensor id: {sensor_id!r}")
        self.sensor_id = sensor_id


class UnknownProperty(SensorSearchError):
    """A property name is absent from the active schema."""

    def __init__(self, name: str):
        super().__init__(f"unknown property: {name!r}")
        self.name = name


class QuerySyntaxError(SensorSearchError):
    """The query text does not match the grammar."""

    def __init__(self, position: int, expected: str):
        super().__init__(f"at position {position}: expected {expected}")
        self.position = position
        self.expected = expected


class EmptyCandidates(SensorSearchError):
    """Normalization needs at least one candidate sensor."""


class DimensionMismatch(SensorSearchError):
    """Point, ideal and weights do not share one dimension list."""


class NoCheckedProperties(SensorSearchError):
    """A priority profile has no checked property, so no weights exist."""


class PlanMismatch(SensorSearchError):
    """A pruning plan was built for a different candidate set."""


class NoSnapshot(SensorSearchError):
    """No catalog has been published yet."""
