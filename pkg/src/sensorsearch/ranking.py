"""Proximity-based ranking.

Slider priorities become comparative weights, candidate sensors are plotted
into a [0, 1]-normalized space with polarity flipped so 1 is always best,
and each sensor is scored by its weighted Euclidean distance to the ideal
point (the CPWI). Smaller distance ranks higher.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCandidates,
    NoCheckedProperties,
    UnknownProperty,
)
from .registry import CandidateSet, Polarity, PropertySchema

__all__ = [
    "PriorityEntry",
    "PriorityProfile",
    "WeightVector",
    "NormalizedSpace",
    "RankedResult",
    "compute_weights",
    "normalize",
    "compute_cpwi",
    "score_sensors",
    "rank_scored",
    "rank_sensors",
    "select_top_n",
    "profile_from_dict",
    "profile_to_dict",
]

DEFAULT_SCALE = 100


@dataclass(frozen=True)
class PriorityEntry:
    """Per-property UI state: checked flag, slider position, optional ideal.

    The ideal, when given, lives in normalized polarity-flipped space, so
    0.8 means "80% of the way to the best value" regardless of polarity.
    """

    checked: bool = False
    slider: int = 0
    ideal: float | None = None


@dataclass(frozen=True)
class PriorityProfile:
    """User priorities over context properties, as captured by sliders."""

    scale: int = DEFAULT_SCALE
    entries: Mapping[str, PriorityEntry] = field(default_factory=dict)

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        for name, entry in self.entries.items():
            if not (0 <= entry.slider <= self.scale):
                raise ValueError(
                    f"{name}: slider {entry.slider} outside [0, {self.scale}]"
                )
            if entry.ideal is not None and not (0.0 <= entry.ideal <= 1.0):
                raise ValueError(f"{name}: ideal {entry.ideal} outside [0, 1]")

    def checked_properties(self) -> list[str]:
        return [name for name, e in self.entries.items() if e.checked]

    def ideal_overrides(self) -> dict[str, float]:
        return {
            name: e.ideal
            for name, e in self.entries.items()
            if e.checked and e.ideal is not None
        }


@dataclass(frozen=True)
class WeightVector:
    """Normalized weights over the checked properties; they sum to 1."""

    weights: Mapping[str, float]

    def __post_init__(self):
        if not self.weights:
            raise NoCheckedProperties("weight vector needs at least one property")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, expected 1")
        for name, w in self.weights.items():
            if not (0.0 <= w <= 1.0):
                raise ValueError(f"{name}: weight {w} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.weights)

    def properties(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def as_array(self, order: Sequence[str]) -> np.ndarray:
        try:
            return np.array([self.weights[p] for p in order], dtype=np.float64)
        except KeyError as exc:
            raise DimensionMismatch(f"weight missing for {exc.args[0]!r}") from None


def compute_weights(profile: PriorityProfile) -> WeightVector:
    """Comparative weights from slider positions: more priority, more weight.

    Checked sliders are normalized by their sum; if every checked slider is
    at 0 the weights fall back to uniform.
    """
    checked = [(name, e.slider) for name, e in profile.entries.items() if e.checked]
    if not checked:
        raise NoCheckedProperties("no checked properties in profile")
    total = sum(s for _, s in checked)
    if total == 0:
        return WeightVector({name: 1.0 / len(checked) for name, _ in checked})
    return WeightVector({name: s / total for name, s in checked})


class NormalizedSpace:
    """Candidates plotted into [0, 1] space, one dimension per checked property."""

    def __init__(
        self,
        properties: Sequence[str],
        sensor_ids: np.ndarray,
        coords: np.ndarray,
        ideal: np.ndarray,
        bounds_used: Mapping[str, tuple[float, float]],
        id_rank: np.ndarray,
    ):
        self.properties = tuple(properties)
        self.sensor_ids = sensor_ids
        self.coords = coords
        self.ideal = ideal
        self.bounds_used = dict(bounds_used)
        self.id_rank = id_rank
        self.coords.setflags(write=False)
        self.ideal.setflags(write=False)
        self._row = {str(sid): i for i, sid in enumerate(sensor_ids)}

    def __len__(self) -> int:
        return len(self.sensor_ids)

    def point(self, sensor_id: str) -> np.ndarray:
        return self.coords[self._row[sensor_id]]


def normalize(
    candidates: CandidateSet,
    schema: PropertySchema,
    checked: Sequence[str],
    ideal_overrides: Mapping[str, float] | None = None,
) -> NormalizedSpace:
    """Min-max normalize the candidate set over the checked properties.

    Declared schema bounds take precedence; otherwise the observed min/max
    over the candidates is used. Values clamp into [0, 1], lower-is-better
    dimensions flip so 1 is always best. A missing value maps to 0 (the
    worst coordinate); a degenerate dimension (max == min) maps to 0.5.
    The ideal point defaults to all ones.
    """
    if len(candidates) == 0:
        raise EmptyCandidates("cannot normalize an empty candidate set")
    checked = tuple(checked)
    for name in checked:
        if name not in schema:
            raise UnknownProperty(name)
    ideal_overrides = ideal_overrides or {}

    n, k = len(candidates), len(checked)
    coords = np.empty((n, k), dtype=np.float64)
    bounds_used: dict[str, tuple[float, float]] = {}
    for j, name in enumerate(checked):
        prop = schema.get(name)
        raw = candidates.column(name)
        missing = np.isnan(raw)
        if prop.bounds is not None:
            lo, hi = prop.bounds
        else:
            present = raw[~missing]
            if present.size:
                lo, hi = float(present.min()), float(present.max())
            else:
                lo, hi = 0.0, 1.0
        bounds_used[name] = (lo, hi)
        if hi == lo:
            col = np.full(n, 0.5)
        else:
            col = np.clip((raw - lo) / (hi - lo), 0.0, 1.0)
            if prop.polarity is Polarity.LOWER_IS_BETTER:
                col = 1.0 - col
        col[missing] = 0.0
        coords[:, j] = col

    ideal = np.ones(k, dtype=np.float64)
    for name, value in ideal_overrides.items():
        if name in checked:
            ideal[checked.index(name)] = value

    return NormalizedSpace(
        properties=checked,
        sensor_ids=candidates.id_array(),
        coords=coords,
        ideal=ideal,
        bounds_used=bounds_used,
        id_rank=candidates.id_rank(),
    )


def compute_cpwi(
    point: Sequence[float],
    ideal: Sequence[float],
    weights: WeightVector,
    dimensions: Sequence[str] | None = None,
) -> float:
    """Weighted Euclidean distance sqrt(sum_i w_i * (ideal_i - point_i)^2).

    With weights summing to 1 and coordinates in [0, 1] the result lies in
    [0, 1]; zero means the sensor sits exactly on the ideal point.
    """
    dims = tuple(dimensions) if dimensions is not None else weights.properties()
    if len(point) != len(dims) or len(ideal) != len(dims):
        raise DimensionMismatch(
            f"point/ideal have {len(point)}/{len(ideal)} dims, expected {len(dims)}"
        )
    if set(dims) != set(weights.properties()):
        raise DimensionMismatch("weight properties differ from the dimension list")
    w = weights.as_array(dims)
    diff = np.asarray(ideal, dtype=np.float64) - np.asarray(point, dtype=np.float64)
    return float(np.sqrt(np.sum(w * diff * diff)))


class RankedResult:
    """Sensors ordered by ascending CPWI, ties by ascending sensor id.

    Holds the full ordering; entry tuples materialize lazily so ranking a
    million sensors does not pay for a million Python objects up front.
    """

    __slots__ = ("_ids", "_scores", "_entries")

    def __init__(self, entries: Sequence[tuple[str, float]] = ()):
        self._entries: tuple[tuple[str, float], ...] | None = tuple(entries)
        self._ids: np.ndarray | None = None
        self._scores: np.ndarray | None = None

    @classmethod
    def from_arrays(cls, ids: np.ndarray, scores: np.ndarray) -> "RankedResult":
        """Adopt already-sorted id/score arrays without materializing tuples."""
        result = cls.__new__(cls)
        result._entries = None
        result._ids = ids
        result._scores = scores
        return result

    @property
    def entries(self) -> tuple[tuple[str, float], ...]:
        if self._entries is None:
            self._entries = tuple(
                (str(sid), float(score))
                for sid, score in zip(self._ids, self._scores)
            )
        return self._entries

    def __len__(self) -> int:
        if self._entries is not None:
            return len(self._entries)
        return len(self._ids)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RankedResult):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self) -> str:
        return f"RankedResult(length={len(self)})"

    def ids(self) -> list[str]:
        if self._entries is not None:
            return [sid for sid, _ in self._entries]
        return [str(sid) for sid in self._ids]

    def head(self, n: int) -> "RankedResult":
        if self._entries is not None:
            return RankedResult(self._entries[:n])
        return RankedResult.from_arrays(self._ids[:n], self._scores[:n])


def score_sensors(space: NormalizedSpace, weights: WeightVector) -> np.ndarray:
    """CPWI for every candidate in space order (the indexing step)."""
    if set(space.properties) != set(weights.properties()):
        raise DimensionMismatch("space and weights cover different properties")
    w = weights.as_array(space.properties)
    acc = np.zeros(len(space), dtype=np.float64)
    for j in range(len(space.properties)):
        diff = space.ideal[j] - space.coords[:, j]
        acc += w[j] * diff * diff
    return np.sqrt(acc)


def rank_scored(space: NormalizedSpace, scores: np.ndarray) -> RankedResult:
    """Order candidates by precomputed CPWI ascending, ids breaking ties."""
    order = np.lexsort((space.id_rank, scores))
    return RankedResult.from_arrays(space.sensor_ids[order], scores[order])


def rank_sensors(space: NormalizedSpace, weights: WeightVector) -> RankedResult:
    """Order all candidates by CPWI ascending, sensor id breaking ties."""
    return rank_scored(space, score_sensors(space, weights))


def select_top_n(ranked: RankedResult, n: int) -> RankedResult:
    """First min(n, len) entries, order preserved."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ranked.head(n)


def profile_to_dict(profile: PriorityProfile) -> dict:
    """Wire form: {"scale": int, "entries": {name: {checked, slider, ideal?}}}."""
    entries = {}
    for name, e in profile.entries.items():
        doc = {"checked": e.checked, "slider": e.slider}
        if e.ideal is not None:
            doc["ideal"] = e.ideal
        entries[name] = doc
    return {"scale": profile.scale, "entries": entries}


def profile_from_dict(doc: Mapping) -> PriorityProfile:
    """Parse the wire form produced by profile_to_dict."""
    if not isinstance(doc, Mapping):
        raise ValueError("profile document must be an object")
    scale = int(doc.get("scale", DEFAULT_SCALE))
    raw_entries = doc.get("entries", {})
    if not isinstance(raw_entries, Mapping):
        raise ValueError("profile 'entries' must be an object")
    entries = {}
    for name, e in raw_entries.items():
        if not isinstance(e, Mapping):
            raise ValueError(f"profile entry {name!r} must be an object")
        ideal = e.get("ideal")
        entries[str(name)] = PriorityEntry(
            checked=bool(e.get("checked", False)),
            slider=int(e.get("slider", 0)),
            ideal=None if ideal is None else float(ideal),
        )
    return PriorityProfile(scale=scale, entries=entries)
