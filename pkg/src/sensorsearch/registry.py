"""Sensor catalog: property schema, records, immutable snapshots, loaders.

A snapshot stores the catalog in columnar form (one numpy column per
context property, NaN marking a missing value) so that filtering, pruning
and ranking stay vectorized at the million-sensor scale. SensorRecord is
the per-row view, materialized lazily.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateId,
    MalformedRow,
    SchemaError,
    UnknownProperty,
)

__all__ = [
    "Polarity",
    "PropertyDef",
    "PropertySchema",
    "BoundingBox",
    "SensorRecord",
    "RegistrySnapshot",
    "CandidateSet",
    "default_schema",
    "load_catalog",
    "export_csv",
    "generate_synthetic",
    "snapshot_from_records",
    "schema_from_json",
    "schema_to_json",
    "DEFAULT_REGION",
    "DEFAULT_SENSOR_TYPES",
]

META_COLUMNS = ("id", "type", "lat", "lon")


class Polarity(str, Enum):
    """Whether larger raw values of a property are better or worse."""

    HIGHER_IS_BETTER = "higher_is_better"
    LOWER_IS_BETTER = "lower_is_better"


@dataclass(frozen=True)
class PropertyDef:
    """One context property: name, direction of goodness, optional bounds."""

    name: str
    polarity: Polarity = Polarity.HIGHER_IS_BETTER
    bounds: tuple[float, float] | None = None
    description: str = ""

    def __post_init__(self):
        if not self.name:
            raise SchemaError("property name must be non-empty")
        if self.name in META_COLUMNS:
            raise SchemaError(f"property name {self.name!r} collides with a meta field")
        if self.bounds is not None:
            lo, hi = self.bounds
            if not (lo < hi):
                raise SchemaError(f"property {self.name!r}: bounds require min < max")


@dataclass(frozen=True)
class PropertySchema:
    """Ordered, extendible list of context properties with unique names."""

    properties: tuple[PropertyDef, ...]

    def __post_init__(self):
        if isinstance(self.properties, list):
            object.__setattr__(self, "properties", tuple(self.properties))
        if len(self.properties) < 1:
            raise SchemaError("schema needs at least one property")
        names = [p.name for p in self.properties]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate property names: {dupes}")

    def __len__(self) -> int:
        return len(self.properties)

    def __contains__(self, name: str) -> bool:
        return any(p.name == name for p in self.properties)

    def __iter__(self) -> Iterator[PropertyDef]:
        return iter(self.properties)

    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.properties)

    def get(self, name: str) -> PropertyDef:
        for p in self.properties:
            if p.name == name:
                return p
        raise UnknownProperty(name)

    def index(self, name: str) -> int:
        for i, p in enumerate(self.properties):
            if p.name == name:
                return i
        raise UnknownProperty(name)


@dataclass(frozen=True)
class BoundingBox:
    """Geographic box: south/north latitudes, west/east longitudes."""

    south: float
    west: float
    north: float
    east: float

    def __post_init__(self):
        if not (-90.0 <= self.south <= self.north <= 90.0):
            raise ValueError("bbox requires -90 <= south <= north <= 90")
        if not (-180.0 <= self.west <= 180.0 and -180.0 <= self.east <= 180.0):
            raise ValueError("bbox longitudes must be within [-180, 180]")


@dataclass(frozen=True)
class SensorRecord:
    """A single sensor: identity, type, location, raw property values."""

    id: str
    sensor_type: str
    lat: float
    lon: float
    values: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("sensor id must be non-empty")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"sensor {self.id!r}: lat out of [-90, 90]")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"sensor {self.id!r}: lon out of [-180, 180]")


# The 30 default context properties. Data-acquisition costs, latency and
# response time have no natural unit-free range, so they carry no declared
# bounds; the loader records observed min/max for them as provisional bounds.
_LOWER_IS_BETTER_DEFAULTS = frozenset(
    {
        "response_time",
        "latency",
        "drift",
        "detection_limit",
        "cost_of_data_transmission",
        "cost_of_data_generation",
        "data_ownership_cost",
    }
)

_UNBOUNDED_DEFAULTS = frozenset(
    {
        "response_time",
        "latency",
        "cost_of_data_transmission",
        "cost_of_data_generation",
        "data_ownership_cost",
    }
)

_DEFAULT_PROPERTY_NAMES = (
    "availability",
    "accuracy",
    "reliability",
    "response_time",
    "frequency",
    "sensitivity",
    "measurement_range",
    "selectivity",
    "precision",
    "latency",
    "drift",
    "resolution",
    "detection_limit",
    "operating_power_range",
    "sensor_lifetime",
    "battery_life",
    "security",
    "accessibility",
    "robustness",
    "exception_handling",
    "interoperability",
    "configurability",
    "user_satisfaction_rating",
    "capacity",
    "throughput",
    "cost_of_data_transmission",
    "cost_of_data_generation",
    "data_ownership_cost",
    "bandwidth",
    "trust",
)


def default_schema() -> PropertySchema:
    """The built-in 30-property context framework."""
    defs = []
    for name in _DEFAULT_PROPERTY_NAMES:
        polarity = (
            Polarity.LOWER_IS_BETTER
            if name in _LOWER_IS_BETTER_DEFAULTS
            else Polarity.HIGHER_IS_BETTER
        )
        bounds = None if name in _UNBOUNDED_DEFAULTS else (0.0, 1.0)
        defs.append(PropertyDef(name=name, polarity=polarity, bounds=bounds))
    return PropertySchema(tuple(defs))


class RegistrySnapshot:
    """Immutable, versioned view of the sensor catalog.

    Columns: ids (unicode array), sensor types, latitudes, longitudes and a
    (sensors x properties) float matrix where NaN means "value absent".
    """

    def __init__(
        self,
        schema: PropertySchema,
        ids: Sequence[str],
        types: Sequence[str],
        lats: np.ndarray,
        lons: np.ndarray,
        values: np.ndarray,
        version: int = 1,
    ):
        n = len(ids)
        self.schema = schema
        self.version = int(version)
        self._ids = np.asarray(ids, dtype=str)
        self._types = np.asarray(types, dtype=str)
        self._lats = np.asarray(lats, dtype=np.float64)
        self._lons = np.asarray(lons, dtype=np.float64)
        self._values = np.asarray(values, dtype=np.float64).reshape(n, len(schema))
        if not (len(self._types) == len(self._lats) == len(self._lons) == n):
            raise ValueError("column lengths disagree")
        for arr in (self._ids, self._types, self._lats, self._lons, self._values):
            arr.setflags(write=False)
        self._col = {name: i for i, name in enumerate(schema.names())}
        self._row: dict[str, int] = {}
        for i, sid in enumerate(ids):
            if sid in self._row:
                raise DuplicateId(sid)
            self._row[sid] = i
        self._id_rank: np.ndarray | None = None
        self._observed_bounds: dict[str, tuple[float, float]] | None = None

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def sensor_count(self) -> int:
        return len(self._ids)

    def ids(self) -> list[str]:
        return [str(s) for s in self._ids]

    @property
    def ids_array(self) -> np.ndarray:
        return self._ids

    def id_rank(self) -> np.ndarray:
        """Rank of each sensor's id in ascending id order (tie-break key)."""
        if self._id_rank is None:
            order = np.argsort(self._ids, kind="stable")
            rank = np.empty(len(order), dtype=np.int64)
            rank[order] = np.arange(len(order))
            rank.setflags(write=False)
            self._id_rank = rank
        return self._id_rank

    def observed_bounds(self) -> dict[str, tuple[float, float]]:
        """Observed min/max per property, provisional bounds for unbounded ones."""
        if self._observed_bounds is None:
            out: dict[str, tuple[float, float]] = {}
            for name, col in self._col.items():
                column = self._values[:, col]
                present = column[~np.isnan(column)]
                if present.size:
                    out[name] = (float(present.min()), float(present.max()))
            self._observed_bounds = out
        return dict(self._observed_bounds)

    def column(self, name: str) -> np.ndarray:
        """Raw values of one property over all sensors (NaN = missing)."""
        if name not in self._col:
            raise UnknownProperty(name)
        return self._values[:, self._col[name]]

    @property
    def types(self) -> np.ndarray:
        return self._types

    @property
    def lats(self) -> np.ndarray:
        return self._lats

    @property
    def lons(self) -> np.ndarray:
        return self._lons

    @property
    def values_matrix(self) -> np.ndarray:
        return self._values

    def record(self, index: int) -> SensorRecord:
        row = self._values[index]
        values = {
            name: float(row[col])
            for name, col in self._col.items()
            if not math.isnan(row[col])
        }
        return SensorRecord(
            id=str(self._ids[index]),
            sensor_type=str(self._types[index]),
            lat=float(self._lats[index]),
            lon=float(self._lons[index]),
            values=values,
        )

    def get(self, sensor_id: str) -> SensorRecord | None:
        i = self._row.get(sensor_id)
        return None if i is None else self.record(i)

    def __iter__(self) -> Iterator[SensorRecord]:
        for i in range(len(self._ids)):
            yield self.record(i)

    def all_candidates(self) -> "CandidateSet":
        return CandidateSet(self, np.arange(len(self._ids), dtype=np.int64))

    def with_version(self, version: int) -> "RegistrySnapshot":
        """Same contents under a new version number."""
        clone = RegistrySnapshot.__new__(RegistrySnapshot)
        clone.__dict__.update(self.__dict__)
        clone.version = int(version)
        return clone


class CandidateSet:
    """An ordered subset of a snapshot's sensors (row indices, ascending)."""

    def __init__(self, snapshot: RegistrySnapshot, indices: np.ndarray):
        self.snapshot = snapshot
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indices.setflags(write=False)
        # indices are ascending and unique, so covering the whole snapshot
        # is a pure length check; full sets skip the gather copies below
        self._full = len(self.indices) == len(snapshot)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[SensorRecord]:
        for i in self.indices:
            yield self.snapshot.record(int(i))

    def ids(self) -> list[str]:
        return [str(s) for s in self.id_array()]

    def id_array(self) -> np.ndarray:
        if self._full:
            return self.snapshot.ids_array
        return self.snapshot.ids_array[self.indices]

    def id_rank(self) -> np.ndarray:
        if self._full:
            return self.snapshot.id_rank()
        return self.snapshot.id_rank()[self.indices]

    def column(self, name: str) -> np.ndarray:
        if self._full:
            return self.snapshot.column(name)
        return self.snapshot.column(name)[self.indices]

    def subset(self, positions: np.ndarray) -> "CandidateSet":
        """New candidate set from positions into this one, in snapshot order."""
        chosen = self.indices[np.asarray(positions, dtype=np.int64)]
        return CandidateSet(self.snapshot, np.sort(chosen))


def snapshot_from_records(
    schema: PropertySchema,
    records: Iterable[SensorRecord],
    version: int = 1,
) -> RegistrySnapshot:
    """Build a snapshot from in-memory records (validated against schema)."""
    rows = []
    for rec in records:
        for name in rec.values:
            if name not in schema:
                raise UnknownProperty(name)
        rows.append((rec.id, rec.sensor_type, rec.lat, rec.lon, dict(rec.values)))
    return _build_snapshot(schema, rows, version)


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise MalformedRow(line_no, f"{what}: not a number: {token!r}") from None


def _build_snapshot(
    schema: PropertySchema,
    rows: list[tuple[str, str, float, float, dict[str, float]]],
    version: int,
) -> RegistrySnapshot:
    n = len(rows)
    ids = [r[0] for r in rows]
    types = [r[1] for r in rows]
    lats = np.array([r[2] for r in rows], dtype=np.float64)
    lons = np.array([r[3] for r in rows], dtype=np.float64)
    values = np.full((n, len(schema)), np.nan, dtype=np.float64)
    col = {name: i for i, name in enumerate(schema.names())}
    for i, (_, _, _, _, vals) in enumerate(rows):
        for name, v in vals.items():
            values[i, col[name]] = v
    return RegistrySnapshot(schema, ids, types, lats, lons, values, version=version)


def _load_csv(text: str, schema: PropertySchema) -> list:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header row") from None
    if header[: len(META_COLUMNS)] != list(META_COLUMNS):
        raise MalformedRow(1, f"header must start with {','.join(META_COLUMNS)}")
    prop_cols = header[len(META_COLUMNS):]
    for name in prop_cols:
        if name not in schema:
            raise UnknownProperty(name)
    rows = []
    seen: set[str] = set()
    for line_no, raw in enumerate(reader, start=2):
        if not raw:
            continue  # blank line
        if len(raw) != len(header):
            raise MalformedRow(line_no, f"expected {len(header)} cells, got {len(raw)}")
        sensor_id, sensor_type = raw[0], raw[1]
        if not sensor_id:
            raise MalformedRow(line_no, "empty sensor id")
        if sensor_id in seen:
            raise DuplicateId(sensor_id)
        seen.add(sensor_id)
        lat = _parse_float(raw[2], line_no, "lat")
        lon = _parse_float(raw[3], line_no, "lon")
        if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
            raise MalformedRow(line_no, f"location out of range: ({lat}, {lon})")
        vals: dict[str, float] = {}
        for name, cell in zip(prop_cols, raw[len(META_COLUMNS):]):
            if cell == "":
                continue  # missing value
            vals[name] = _parse_float(cell, line_no, name)
        rows.append((sensor_id, sensor_type, lat, lon, vals))
    return rows


def _load_jsonl(text: str, schema: PropertySchema) -> list:
    rows = []
    seen: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRow(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise MalformedRow(line_no, "expected a JSON object")
        try:
            sensor_id = str(obj["id"])
            sensor_type = str(obj["type"])
            lat = float(obj["lat"])
            lon = float(obj["lon"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRow(line_no, f"bad meta fields: {exc}") from None
        if not sensor_id:
            raise MalformedRow(line_no, "empty sensor id")
        if sensor_id in seen:
            raise DuplicateId(sensor_id)
        seen.add(sensor_id)
        if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
            raise MalformedRow(line_no, f"location out of range: ({lat}, {lon})")
        raw_values = obj.get("values", {})
        if not isinstance(raw_values, dict):
            raise MalformedRow(line_no, "'values' must be an object")
        vals: dict[str, float] = {}
        for name, v in raw_values.items():
            if name not in schema:
                raise UnknownProperty(name)
            if v is None:
                continue
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise MalformedRow(line_no, f"{name}: not a number: {v!r}")
            vals[name] = float(v)
        rows.append((sensor_id, sensor_type, lat, lon, vals))
    return rows


def load_catalog(
    source: str | bytes | io.IOBase,
    fmt: str,
    schema: PropertySchema,
    version: int = 1,
) -> RegistrySnapshot:
    """Parse a CSV or JSON-Lines catalog into a new snapshot.

    The load is atomic: any malformed row, duplicate id or unknown property
    rejects the whole input and no snapshot is produced.
    """
    if isinstance(source, io.IOBase):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    fmt = fmt.lower()
    if fmt == "csv":
        rows = _load_csv(source, schema)
    elif fmt in ("jsonl", "jsonlines"):
        rows = _load_jsonl(source, schema)
    else:
        raise ValueError(f"unsupported catalog format: {fmt!r}")
    return _build_snapshot(schema, rows, version)


def export_csv(snapshot: RegistrySnapshot) -> str:
    """Render a snapshot as CSV; re-loading it reproduces the snapshot."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    names = snapshot.schema.names()
    writer.writerow(list(META_COLUMNS) + list(names))
    for i in range(len(snapshot)):
        row = snapshot.values_matrix[i]
        cells = [
            str(snapshot._ids[i]),
            str(snapshot.types[i]),
            repr(float(snapshot.lats[i])),
            repr(float(snapshot.lons[i])),
        ]
        for c in range(len(names)):
            v = row[c]
            cells.append("" if math.isnan(v) else repr(float(v)))
        writer.writerow(cells)
    return out.getvalue()


DEFAULT_REGION = BoundingBox(south=-35.5, west=148.9, north=-35.1, east=149.4)

DEFAULT_SENSOR_TYPES = (
    "temperature",
    "humidity",
    "pressure",
    "light",
    "soil_moisture",
    "wind_speed",
)


def generate_synthetic(
    count: int,
    schema: PropertySchema,
    seed: int,
    region: BoundingBox = DEFAULT_REGION,
    sensor_types: Sequence[str] = DEFAULT_SENSOR_TYPES,
    version: int = 1,
) -> RegistrySnapshot:
    """Seeded synthetic catalog: values uniform within each property's bounds.

    Pure function of its arguments: the same inputs always produce the
    identical snapshot. Properties without declared bounds draw from [0, 1].
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    width = len(str(count))
    ids = [f"s{i:0{width}d}" for i in range(1, count + 1)]
    type_idx = rng.integers(0, len(sensor_types), size=count)
    types = [sensor_types[i] for i in type_idx]
    lats = rng.uniform(region.south, region.north, size=count)
    lons = rng.uniform(region.west, region.east, size=count)
    values = np.empty((count, len(schema)), dtype=np.float64)
    for c, prop in enumerate(schema):
        lo, hi = prop.bounds if prop.bounds is not None else (0.0, 1.0)
        values[:, c] = rng.uniform(lo, hi, size=count)
    return RegistrySnapshot(schema, ids, types, lats, lons, values, version=version)


def schema_to_json(schema: PropertySchema) -> str:
    """Serialize a schema to its JSON document form."""
    doc = {
        "properties": [
            {
                "name": p.name,
                "polarity": p.polarity.value,
                **({"min": p.bounds[0], "max": p.bounds[1]} if p.bounds else {}),
                **({"description": p.description} if p.description else {}),
            }
            for p in schema
        ]
    }
    return json.dumps(doc, indent=2)


def schema_from_json(text: str) -> PropertySchema:
    """Parse the JSON schema document produced by schema_to_json."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid schema document: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("properties"), list):
        raise SchemaError("schema document must contain a 'properties' list")
    defs = []
    for entry in doc["properties"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise SchemaError(f"bad property entry: {entry!r}")
        polarity = Polarity(entry.get("polarity", Polarity.HIGHER_IS_BETTER.value))
        bounds = None
        if "min" in entry or "max" in entry:
            if "min" not in entry or "max" not in entry:
                raise SchemaError(f"property {entry['name']!r}: min and max go together")
            bounds = (float(entry["min"]), float(entry["max"]))
        defs.append(
            PropertyDef(
                name=str(entry["name"]),
                polarity=polarity,
                bounds=bounds,
                description=str(entry.get("description", "")),
            )
        )
    return PropertySchema(tuple(defs))
