"""Shared builders and independent brute-force oracles.

The oracles here re-derive expected results straight from the definitions
(per-record predicate checks, naive per-sensor distance sums) and never
call into the vectorized implementation paths they verify.
"""

from __future__ import annotations

import math

from sensorsearch.query import (
    Eq,
    InSet,
    PointQuery,
    Range,
    WithinBBox,
    WithinRadius,
)
from sensorsearch.registry import (
    Polarity,
    PropertyDef,
    PropertySchema,
    RegistrySnapshot,
    SensorRecord,
    snapshot_from_records,
)

EARTH_RADIUS_M = 6_371_000.0


def simple_schema(*specs) -> PropertySchema:
    """Schema from (name, polarity, bounds) tuples; trailing items optional."""
    defs = []
    for spec in specs:
        name = spec[0]
        polarity = spec[1] if len(spec) > 1 else Polarity.HIGHER_IS_BETTER
        bounds = spec[2] if len(spec) > 2 else None
        defs.append(PropertyDef(name=name, polarity=polarity, bounds=bounds))
    return PropertySchema(tuple(defs))


def rec(sensor_id, sensor_type="temperature", lat=-35.3, lon=149.1, **values):
    return SensorRecord(
        id=sensor_id, sensor_type=sensor_type, lat=lat, lon=lon, values=values
    )


def snap(schema: PropertySchema, *records: SensorRecord) -> RegistrySnapshot:
    return snapshot_from_records(schema, records)


# ---------------------------------------------------------------------------
# Filter oracle: direct per-record predicate evaluation.
# ---------------------------------------------------------------------------

def _haversine_scalar(lat1, lon1, lat2, lon2) -> float:
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = (
        math.sin(dphi / 2.0) ** 2
        + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    )
    return EARTH_RADIUS_M * 2.0 * math.atan2(math.sqrt(a), math.sqrt(1.0 - a))


def _record_matches(record: SensorRecord, pred) -> bool:
    if isinstance(pred, Eq):
        if pred.field == "id":
            return record.id == pred.value
        if pred.field == "type":
            return record.sensor_type == pred.value
        if pred.field not in record.values:
            return False
        return record.values[pred.field] == pred.value
    if isinstance(pred, InSet):
        if pred.field == "id":
            return record.id in pred.values
        if pred.field == "type":
            return record.sensor_type in pred.values
        if pred.field not in record.values:
            return False
        return record.values[pred.field] in pred.values
    if isinstance(pred, Range):
        if pred.prop not in record.values:
            return False
        return pred.lo <= record.values[pred.prop] <= pred.hi
    if isinstance(pred, WithinRadius):
        dist = _haversine_scalar(record.lat, record.lon, pred.lat, pred.lon)
        return dist <= pred.radius_m
    if isinstance(pred, WithinBBox):
        return (
            pred.south <= record.lat <= pred.north
            and pred.west <= record.lon <= pred.east
        )
    raise TypeError(pred)


def oracle_filter(records, query: PointQuery) -> list[str]:
    """Linear scan over records (any iterable of SensorRecord), in order."""
    return [
        record.id
        for record in records
        if all(_record_matches(record, p) for p in query.predicates)
    ]


# ---------------------------------------------------------------------------
# Ranking oracle: naive normalization + distance, sorted with the tie-break.
# ---------------------------------------------------------------------------

def oracle_rank(
    records: list[SensorRecord],
    schema: PropertySchema,
    checked: list[str],
    weights: dict[str, float],
    ideal_overrides: dict[str, float] | None = None,
) -> list[tuple[str, float]]:
    """Per-sensor weighted Euclidean distance to the ideal, naively.

    Bounds come from the schema when declared, otherwise from the observed
    min/max over the given records. Missing values score 0, a degenerate
    dimension scores 0.5, lower-is-better flips, everything clamps to [0,1].
    """
    ideal_overrides = ideal_overrides or {}
    bounds: dict[str, tuple[float, float]] = {}
    for name in checked:
        prop = schema.get(name)
        if prop.bounds is not None:
            bounds[name] = prop.bounds
        else:
            present = [r.values[name] for r in records if name in r.values]
            bounds[name] = (min(present), max(present)) if present else (0.0, 1.0)

    scored = []
    for record in records:
        acc = 0.0
        for name in checked:
            lo, hi = bounds[name]
            if hi == lo:
                coord = 0.5 if name in record.values else 0.0
            elif name not in record.values:
                coord = 0.0
            else:
                t = (record.values[name] - lo) / (hi - lo)
                t = min(1.0, max(0.0, t))
                coord = 1.0 - t if schema.get(name).polarity is Polarity.LOWER_IS_BETTER else t
            u = ideal_overrides.get(name, 1.0)
            d = u - coord
            acc += weights[name] * d * d
        scored.append((record.id, math.sqrt(acc)))
    scored.sort(key=lambda e: (e[1], e[0]))
    return scored
