"""End-to-end search orchestration and the snapshot lifecycle.

One search runs: hard filter, early return when fewer sensors match than
requested, weight computation, optional heuristic pruning, normalization,
CPWI indexing, ranking and top-N selection. Every phase is timed and the
timings travel with the response.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Mapping

from . import cphf as cphf_mod
from .errors import NoCheckedProperties, NoSnapshot
from .query import parse_query
from .query import evaluate_filter
from .ranking import (
    PriorityProfile,
    profile_from_dict,
    profile_to_dict,
    compute_weights,
    normalize,
    rank_scored,
    score_sensors,
    select_top_n,
)
from .registry import (
    PropertySchema,
    RegistrySnapshot,
    SensorRecord,
    default_schema,
    load_catalog,
)

__all__ = [
    "PHASES",
    "SearchRequest",
    "ResultEntry",
    "SearchResponse",
    "search",
    "SnapshotStore",
]

PHASES = ("filter", "normalize", "cphf", "index", "rank", "select")

FALLBACK_NO_CHECKED = "no_checked_properties"


@dataclass(frozen=True)
class SearchRequest:
    """One search: query text, priorities, and the pruning switch."""

    query_text: str = ""
    profile: PriorityProfile = field(default_factory=PriorityProfile)
    use_cphf: bool = False
    margin_percent: float = 0.0

    def __post_init__(self):
        if self.margin_percent < 0:
            raise ValueError("margin_percent must be >= 0")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SearchRequest":
        return cls(
            query_text=str(doc.get("query_text", "")),
            profile=profile_from_dict(doc.get("profile", {})),
            use_cphf=bool(doc.get("use_cphf", False)),
            margin_percent=float(doc.get("margin_percent", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "query_text": self.query_text,
            "profile": profile_to_dict(self.profile),
            "use_cphf": self.use_cphf,
            "margin_percent": self.margin_percent,
        }


@dataclass(frozen=True)
class ResultEntry:
    """One ranked sensor with its raw property values echoed."""

    id: str
    cpwi: float
    sensor_type: str
    lat: float
    lon: float
    values: Mapping[str, float]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "cpwi": self.cpwi,
            "type": self.sensor_type,
            "lat": self.lat,
            "lon": self.lon,
            "values": dict(self.values),
        }


@dataclass(frozen=True)
class SearchResponse:
    results: tuple[ResultEntry, ...]
    phase_timings: Mapping[str, float]  # microseconds per phase
    candidates_before_cphf: int
    candidates_indexed: int
    truncated: bool
    n_requested: int
    snapshot_version: int
    fallback: str | None = None

    def to_dict(self) -> dict:
        return {
            "results": [r.to_dict() for r in self.results],
            "phase_timings": dict(self.phase_timings),
            "candidates_before_cphf": self.candidates_before_cphf,
            "candidates_indexed": self.candidates_indexed,
            "truncated": self.truncated,
            "n_requested": self.n_requested,
            "snapshot_version": self.snapshot_version,
            "fallback": self.fallback,
        }


def _entry(record: SensorRecord, cpwi: float) -> ResultEntry:
    return ResultEntry(
        id=record.id,
        cpwi=cpwi,
        sensor_type=record.sensor_type,
        lat=record.lat,
        lon=record.lon,
        values=dict(record.values),
    )


def search(snapshot: RegistrySnapshot, request: SearchRequest) -> SearchResponse:
    """Run the full selection pipeline against one snapshot.

    When fewer sensors pass the hard filter than requested, the filtered
    set is returned as-is (snapshot order, CPWI 0) with truncated=True.
    A profile with nothing checked falls back to the first N filtered
    sensors, flagged so callers can tell ranking never happened.
    """
    timings = {phase: 0.0 for phase in PHASES}

    t0 = time.perf_counter_ns()
    query = parse_query(request.query_text)
    filtered = evaluate_filter(snapshot, query)
    timings["filter"] = (time.perf_counter_ns() - t0) / 1000.0

    n = query.n
    if len(filtered) < n:
        return SearchResponse(
            results=tuple(_entry(rec, 0.0) for rec in filtered),
            phase_timings=timings,
            candidates_before_cphf=len(filtered),
            candidates_indexed=0,
            truncated=True,
            n_requested=n,
            snapshot_version=snapshot.version,
        )

    try:
        weights = compute_weights(request.profile)
    except NoCheckedProperties:
        head = tuple(
            _entry(snapshot.record(int(i)), 0.0) for i in filtered.indices[:n]
        )
        return SearchResponse(
            results=head,
            phase_timings=timings,
            candidates_before_cphf=len(filtered),
            candidates_indexed=0,
            truncated=False,
            n_requested=n,
            snapshot_version=snapshot.version,
            fallback=FALLBACK_NO_CHECKED,
        )

    candidates = filtered
    if request.use_cphf:
        t0 = time.perf_counter_ns()
        plan = cphf_mod.build_plan(
            candidate_count=len(filtered),
            weights=weights,
            n_requested=n,
            margin_percent=request.margin_percent,
        )
        candidates = cphf_mod.heuristic_filter(
            filtered,
            snapshot.schema,
            request.profile.checked_properties(),
            weights,
            plan,
        )
        timings["cphf"] = (time.perf_counter_ns() - t0) / 1000.0

    checked = request.profile.checked_properties()
    t0 = time.perf_counter_ns()
    space = normalize(
        candidates,
        snapshot.schema,
        checked,
        request.profile.ideal_overrides(),
    )
    timings["normalize"] = (time.perf_counter_ns() - t0) / 1000.0

    t0 = time.perf_counter_ns()
    scores = score_sensors(space, weights)
    timings["index"] = (time.perf_counter_ns() - t0) / 1000.0

    t0 = time.perf_counter_ns()
    ranked = rank_scored(space, scores)
    timings["rank"] = (time.perf_counter_ns() - t0) / 1000.0

    t0 = time.perf_counter_ns()
    top = select_top_n(ranked, n)
    timings["select"] = (time.perf_counter_ns() - t0) / 1000.0

    results = tuple(
        _entry(snapshot.get(sensor_id), cpwi) for sensor_id, cpwi in top
    )
    return SearchResponse(
        results=results,
        phase_timings=timings,
        candidates_before_cphf=len(filtered),
        candidates_indexed=len(candidates),
        truncated=False,
        n_requested=n,
        snapshot_version=snapshot.version,
    )


class SnapshotStore:
    """Thread-safe holder for the active snapshot.

    Loads build the new snapshot off to the side and swap it in atomically;
    a search keeps whatever snapshot it started with. Versions increase by
    one per successful load.
    """

    def __init__(self, schema: PropertySchema | None = None):
        self.schema = schema or default_schema()
        self._snapshot: RegistrySnapshot | None = None
        self._load_lock = threading.Lock()

    def current(self) -> RegistrySnapshot | None:
        return self._snapshot

    def require(self) -> RegistrySnapshot:
        snapshot = self._snapshot
        if snapshot is None:
            raise NoSnapshot("no catalog loaded yet")
        return snapshot

    def load(self, source, fmt: str) -> RegistrySnapshot:
        with self._load_lock:
            prev = self._snapshot.version if self._snapshot is not None else 0
            snapshot = load_catalog(source, fmt, self.schema, version=prev + 1)
            self._snapshot = snapshot
            return snapshot

    def install(self, snapshot: RegistrySnapshot) -> RegistrySnapshot:
        """Publish an externally built snapshot (e.g. a synthetic catalog)."""
        with self._load_lock:
            prev = self._snapshot.version if self._snapshot is not None else 0
            versioned = snapshot.with_version(prev + 1)
            self.schema = versioned.schema
            self._snapshot = versioned
            return versioned
