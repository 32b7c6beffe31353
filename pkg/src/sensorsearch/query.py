"""Hard (point-based) filtering: a small conjunctive query language.

Grammar::

    query  := [ clause ("AND" clause)* ]
    clause := IDENT "=" (STRING | NUMBER)
            | IDENT "in" "[" value ("," value)* "]"
            | IDENT "between" NUMBER "and" NUMBER
            | "within" "radius" "(" lat "," lon "," meters ")"
            | "within" "bbox" "(" south "," west "," north "," east ")"
            | "n" "=" INT

String values are only valid for the meta fields ``id`` and ``type``.
The ``n`` clause sets the number of sensors required (default 10).
Keywords are case-insensitive; property names are case-sensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import QuerySyntaxError, UnknownProperty
from .registry import CandidateSet, RegistrySnapshot

__all__ = [
    "Eq",
    "InSet",
    "Range",
    "WithinRadius",
    "WithinBBox",
    "Predicate",
    "PointQuery",
    "parse_query",
    "evaluate_filter",
    "haversine_m",
    "EARTH_RADIUS_M",
]

META_FIELDS = ("id", "type")
DEFAULT_N = 10
EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class Eq:
    field: str
    value: Union[str, float]


@dataclass(frozen=True)
class InSet:
    field: str
    values: tuple


@dataclass(frozen=True)
class Range:
    prop: str
    lo: float
    hi: float  # inclusive on both ends


@dataclass(frozen=True)
class WithinRadius:
    lat: float
    lon: float
    radius_m: float


@dataclass(frozen=True)
class WithinBBox:
    south: float
    west: float
    north: float
    east: float


Predicate = Union[Eq, InSet, Range, WithinRadius, WithinBBox]


@dataclass(frozen=True)
class PointQuery:
    """Conjunction of hard predicates plus the required sensor count."""

    predicates: tuple = ()
    n: int = DEFAULT_N

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"[^"]*")
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[=,()\[\]])
    """,
    re.VERBOSE,
)


class _Tokens:
    """Token stream with position tracking for error reporting."""

    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise QuerySyntaxError(pos, f"a token (found {text[pos]!r})")
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self, expected: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError(len(self.text), expected)
        self.i += 1
        return tok

    def expect_punct(self, ch: str) -> None:
        kind, val, pos = self.next(repr(ch))
        if kind != "punct" or val != ch:
            raise QuerySyntaxError(pos, repr(ch))

    def expect_keyword(self, word: str) -> None:
        kind, val, pos = self.next(repr(word))
        if kind != "ident" or val.lower() != word:
            raise QuerySyntaxError(pos, repr(word))

    def expect_number(self, what: str = "a number") -> tuple[float, int]:
        kind, val, pos = self.next(what)
        if kind != "number":
            raise QuerySyntaxError(pos, what)
        return float(val), pos

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "ident" and tok[1].lower() == word


def _parse_value(ts: _Tokens, allow_string: bool):
    kind, val, pos = ts.next("a value")
    if kind == "number":
        return float(val)
    if kind == "string":
        if not allow_string:
            raise QuerySyntaxError(pos, "a number (strings only match id/type)")
        return val[1:-1]
    raise QuerySyntaxError(pos, "a value")


def _parse_within(ts: _Tokens) -> Predicate:
    kind, val, pos = ts.next("'radius' or 'bbox'")
    shape = val.lower() if kind == "ident" else ""
    if shape == "radius":
        ts.expect_punct("(")
        lat, _ = ts.expect_number("latitude")
        ts.expect_punct(",")
        lon, _ = ts.expect_number("longitude")
        ts.expect_punct(",")
        radius, rpos = ts.expect_number("radius in meters")
        ts.expect_punct(")")
        if radius <= 0:
            raise QuerySyntaxError(rpos, "a radius > 0")
        return WithinRadius(lat, lon, radius)
    if shape == "bbox":
        ts.expect_punct("(")
        south, spos = ts.expect_number("south latitude")
        ts.expect_punct(",")
        west, _ = ts.expect_number("west longitude")
        ts.expect_punct(",")
        north, _ = ts.expect_number("north latitude")
        ts.expect_punct(",")
        east, _ = ts.expect_number("east longitude")
        ts.expect_punct(")")
        if south > north:
            raise QuerySyntaxError(spos, "south <= north")
        return WithinBBox(south, west, north, east)
    raise QuerySyntaxError(pos, "'radius' or 'bbox'")


def _parse_clause(ts: _Tokens) -> tuple[Predicate | None, int | None]:
    """Returns (predicate, None) or (None, n) for an 'n = <int>' clause."""
    if ts.at_keyword("within"):
        ts.next("'within'")
        return _parse_within(ts), None

    kind, name, pos = ts.next("a property name")
    if kind != "ident":
        raise QuerySyntaxError(pos, "a property name")
    is_meta = name in META_FIELDS

    kind, op, op_pos = ts.next("'=', 'in' or 'between'")
    if kind == "punct" and op == "=":
        if name == "n":
            val, vpos = ts.expect_number("a positive integer")
            if val != int(val) or int(val) < 1:
                raise QuerySyntaxError(vpos, "a positive integer")
            return None, int(val)
        return Eq(name, _parse_value(ts, allow_string=is_meta)), None
    if kind == "ident" and op.lower() == "in":
        ts.expect_punct("[")
        values = [_parse_value(ts, allow_string=is_meta)]
        while True:
            tok = ts.peek()
            if tok is not None and tok[0] == "punct" and tok[1] == ",":
                ts.next("','")
                values.append(_parse_value(ts, allow_string=is_meta))
            else:
                break
        ts.expect_punct("]")
        return InSet(name, tuple(values)), None
    if kind == "ident" and op.lower() == "between":
        if is_meta:
            raise QuerySyntaxError(op_pos, "'=' or 'in' (between needs a numeric property)")
        lo, lo_pos = ts.expect_number("a number")
        ts.expect_keyword("and")
        hi, _ = ts.expect_number("a number")
        if lo > hi:
            raise QuerySyntaxError(lo_pos, "min <= max")
        return Range(name, lo, hi), None
    raise QuerySyntaxError(op_pos, "'=', 'in' or 'between'")


def parse_query(text: str) -> PointQuery:
    """Parse query text into a PointQuery; empty text matches everything."""
    ts = _Tokens(text)
    predicates: list[Predicate] = []
    n = DEFAULT_N
    if ts.peek() is not None:
        while True:
            pred, clause_n = _parse_clause(ts)
            if pred is not None:
                predicates.append(pred)
            if clause_n is not None:
                n = clause_n
            if ts.peek() is None:
                break
            ts.expect_keyword("and")
            if ts.peek() is None:
                raise QuerySyntaxError(len(text), "a clause after 'AND'")
    return PointQuery(tuple(predicates), n)


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters (mean Earth radius). Vectorized."""
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dphi = np.radians(np.subtract(lat2, lat1))
    dlam = np.radians(np.subtract(lon2, lon1))
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    return EARTH_RADIUS_M * 2.0 * np.arctan2(np.sqrt(a), np.sqrt(1.0 - a))


def _predicate_mask(snapshot: RegistrySnapshot, pred: Predicate) -> np.ndarray:
    if isinstance(pred, Eq):
        if pred.field == "id":
            return snapshot.ids_array == str(pred.value)
        if pred.field == "type":
            return snapshot.types == str(pred.value)
        if isinstance(pred.value, str):
            raise TypeError(f"property {pred.field!r} takes numeric values")
        col = snapshot.column(pred.field)
        return col == float(pred.value)  # NaN never equals, so missing excluded
    if isinstance(pred, InSet):
        if pred.field == "id":
            return np.isin(snapshot.ids_array, [str(v) for v in pred.values])
        if pred.field == "type":
            return np.isin(snapshot.types, [str(v) for v in pred.values])
        if any(isinstance(v, str) for v in pred.values):
            raise TypeError(f"property {pred.field!r} takes numeric values")
        col = snapshot.column(pred.field)
        return np.isin(col, [float(v) for v in pred.values])
    if isinstance(pred, Range):
        col = snapshot.column(pred.prop)
        return (col >= pred.lo) & (col <= pred.hi)  # NaN compares false
    if isinstance(pred, WithinRadius):
        dist = haversine_m(snapshot.lats, snapshot.lons, pred.lat, pred.lon)
        return dist <= pred.radius_m
    if isinstance(pred, WithinBBox):
        return (
            (snapshot.lats >= pred.south)
            & (snapshot.lats <= pred.north)
            & (snapshot.lons >= pred.west)
            & (snapshot.lons <= pred.east)
        )
    raise TypeError(f"unknown predicate: {pred!r}")


def evaluate_filter(snapshot: RegistrySnapshot, query: PointQuery) -> CandidateSet:
    """Sensors satisfying every predicate, in snapshot order.

    A sensor missing a value for a value predicate's property never matches.
    Property names are validated against the snapshot schema up front.
    """
    for pred in query.predicates:
        name = getattr(pred, "field", None) or getattr(pred, "prop", None)
        if name is not None and name not in META_FIELDS and name not in snapshot.schema:
            raise UnknownProperty(name)
    mask = np.ones(len(snapshot), dtype=bool)
    for pred in query.predicates:
        mask &= _predicate_mask(snapshot, pred)
        if not mask.any():
            break
    return CandidateSet(snapshot, np.nonzero(mask)[0].astype(np.int64))
