"""Desk-scale experiment harness emitting CSV result tables.

Four experiments cover the engine's performance envelope: per-phase timing
against sensor count, indexing cost against property count, heuristic
pruning against the exhaustive pipeline, and pruning accuracy against the
margin of error. Timings are reported, never asserted; accuracy values are
deterministic for fixed seeds.
"""

from __future__ import annotations

import csv
import gc
import io
import statistics
import time
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .cphf import cphf_accuracy
from .pipeline import PHASES, SearchRequest, SearchResponse, search
from .ranking import PriorityEntry, PriorityProfile, RankedResult
from .registry import (
    Polarity,
    PropertyDef,
    PropertySchema,
    RegistrySnapshot,
    default_schema,
    generate_synthetic,
)

__all__ = ["Experiment", "ExperimentSpec", "run_experiment", "schema_with_properties"]

DEFAULT_REPETITIONS = 10


class Experiment(str, Enum):
    PHASE_TIMING = "phase-timing"
    PROPERTY_SCALING = "property-scaling"
    CPHF_SPEEDUP = "cphf-speedup"
    ACCURACY_VS_MARGIN = "accuracy-vs-margin"


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: Experiment
    sensor_counts: tuple[int, ...] = (1_000, 10_000)
    property_counts: tuple[int, ...] = (5, 10, 20, 30)
    n_requested: int = 50
    margins: tuple[float, ...] = (0.0, 25.0, 50.0, 100.0, 200.0)
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    repetitions: int = DEFAULT_REPETITIONS

    def __post_init__(self):
        if not self.sensor_counts or not self.property_counts:
            raise ValueError("sensor_counts and property_counts must be non-empty")
        if self.experiment is Experiment.ACCURACY_VS_MARGIN and not self.seeds:
            raise ValueError("accuracy experiment needs at least one seed")
        if self.experiment in (Experiment.CPHF_SPEEDUP, Experiment.ACCURACY_VS_MARGIN):
            if not self.margins:
                raise ValueError("margins must be non-empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.n_requested < 1:
            raise ValueError("n_requested must be >= 1")


def schema_with_properties(count: int) -> PropertySchema:
    """First `count` default properties, padded with synthetic ones past 30."""
    base = list(default_schema())
    if count <= len(base):
        return PropertySchema(tuple(base[:count]))
    extra = [
        PropertyDef(name=f"extra_property_{i}", polarity=Polarity.HIGHER_IS_BETTER,
                    bounds=(0.0, 1.0))
        for i in range(1, count - len(base) + 1)
    ]
    return PropertySchema(tuple(base + extra))


def _uniform_profile(names: Sequence[str]) -> PriorityProfile:
    return PriorityProfile(
        entries={name: PriorityEntry(checked=True, slider=50) for name in names}
    )


def _seeded_profile(names: Sequence[str], seed: int) -> PriorityProfile:
    rng = np.random.default_rng(seed)
    sliders = rng.integers(1, 101, size=len(names))
    return PriorityProfile(
        entries={
            name: PriorityEntry(checked=True, slider=int(s))
            for name, s in zip(names, sliders)
        }
    )


def _range_sweep_query(schema: PropertySchema, predicate_count: int, n: int) -> str:
    """Match-all query text with one full-range predicate per property."""
    clauses = []
    for prop in list(schema)[:predicate_count]:
        lo, hi = prop.bounds if prop.bounds is not None else (0.0, 1.0)
        clauses.append(f"{prop.name} between {lo} and {hi}")
    clauses.append(f"n = {n}")
    return " AND ".join(clauses)


def _timed_search(
    snapshot: RegistrySnapshot, request: SearchRequest
) -> tuple[SearchResponse, float]:
    t0 = time.perf_counter_ns()
    response = search(snapshot, request)
    total_us = (time.perf_counter_ns() - t0) / 1000.0
    return response, total_us


class _CellSamples:
    """Accumulated timings for one (snapshot, request) measurement cell."""

    def __init__(self, snapshot: RegistrySnapshot, request: SearchRequest):
        self.snapshot = snapshot
        self.request = request
        self.phases: dict[str, list[float]] = {p: [] for p in PHASES}
        self.totals: list[float] = []
        self.last_response: SearchResponse | None = None


def _measure_cells(cells: Sequence[_CellSamples], repetitions: int) -> None:
    """Warm each cell once, then time them in interleaved rounds.

    Round-robin interleaving spreads slow environment drift evenly across
    cells; garbage is collected outside the timed region and the collector
    stays off inside it, so collector pauses never land in a timing.
    """
    for cell in cells:
        cell.last_response, _ = _timed_search(cell.snapshot, cell.request)
    gc_was_enabled = gc.isenabled()
    try:
        for _ in range(repetitions):
            for cell in cells:
                gc.collect()
                gc.disable()
                response, total_us = _timed_search(cell.snapshot, cell.request)
                if gc_was_enabled:
                    gc.enable()
                for p, v in response.phase_timings.items():
                    cell.phases[p].append(v)
                cell.totals.append(total_us)
                cell.last_response = response
    finally:
        if gc_was_enabled:
            gc.enable()


def _mean_std(samples: list[float]) -> tuple[float, float]:
    return statistics.fmean(samples), statistics.pstdev(samples)


_PHASE_ORDER = ("filter", "cphf", "normalize", "index", "rank", "select")


def _timing_rows(spec: ExperimentSpec, sweep_predicates: bool) -> tuple[list[str], list[list]]:
    header = ["experiment", "sensor_count", "property_count", "n_requested",
              "repetitions"]
    for phase in _PHASE_ORDER:
        header += [f"{phase}_mean_us", f"{phase}_std_us"]
    header += ["total_mean_us", "total_std_us"]

    # One catalog per sensor count, wide enough for the largest property
    # sweep; each cell checks (and optionally filters on) a prefix of it.
    schema = schema_with_properties(max(spec.property_counts))
    names = schema.names()
    seed = spec.seeds[0] if spec.seeds else 1

    rows = []
    for sensor_count in spec.sensor_counts:
        snapshot = generate_synthetic(sensor_count, schema, seed=seed)
        cells = []
        for prop_count in spec.property_counts:
            checked = names[:prop_count]
            predicate_count = prop_count if sweep_predicates else 0
            query = _range_sweep_query(schema, predicate_count, spec.n_requested)
            request = SearchRequest(query_text=query, profile=_uniform_profile(checked))
            cells.append(_CellSamples(snapshot, request))
        _measure_cells(cells, spec.repetitions)
        for prop_count, cell in zip(spec.property_counts, cells):
            row = [spec.experiment.value, sensor_count, prop_count,
                   spec.n_requested, spec.repetitions]
            for phase in _PHASE_ORDER:
                mean, std = _mean_std(cell.phases[phase])
                row += [mean, std]
            mean, std = _mean_std(cell.totals)
            row += [mean, std]
            rows.append(row)
    return header, rows


def _speedup_rows(spec: ExperimentSpec) -> tuple[list[str], list[list]]:
    header = ["experiment", "sensor_count", "property_count", "n_requested",
              "margin_percent", "repetitions",
              "exact_total_mean_us", "exact_total_std_us",
              "cphf_total_mean_us", "cphf_total_std_us",
              "exact_candidates_indexed", "cphf_candidates_indexed"]
    rows = []
    margin = spec.margins[0]
    seed = spec.seeds[0] if spec.seeds else 1
    prop_count = spec.property_counts[0]
    schema = schema_with_properties(prop_count)
    profile = _uniform_profile(schema.names())
    query = f"n = {spec.n_requested}"
    for sensor_count in spec.sensor_counts:
        snapshot = generate_synthetic(sensor_count, schema, seed=seed)
        exact = _CellSamples(snapshot, SearchRequest(query_text=query, profile=profile))
        pruned = _CellSamples(
            snapshot,
            SearchRequest(
                query_text=query, profile=profile,
                use_cphf=True, margin_percent=margin,
            ),
        )
        _measure_cells([exact, pruned], spec.repetitions)
        e_mean, e_std = _mean_std(exact.totals)
        c_mean, c_std = _mean_std(pruned.totals)
        rows.append([
            spec.experiment.value, sensor_count, prop_count, spec.n_requested,
            margin, spec.repetitions, e_mean, e_std, c_mean, c_std,
            exact.last_response.candidates_indexed,
            pruned.last_response.candidates_indexed,
        ])
    return header, rows


def _accuracy_rows(spec: ExperimentSpec) -> tuple[list[str], list[list]]:
    header = ["experiment", "sensor_count", "property_count", "n_requested",
              "margin_percent", "seed_count", "accuracy_mean", "accuracy_std"]
    rows = []
    prop_count = spec.property_counts[0]
    schema = schema_with_properties(prop_count)
    names = schema.names()
    query = f"n = {spec.n_requested}"
    accuracies: dict[float, list[float]] = {m: [] for m in spec.margins}
    for sensor_count in spec.sensor_counts:
        for margin in spec.margins:
            accuracies[margin] = []
        for seed in spec.seeds:
            snapshot = generate_synthetic(sensor_count, schema, seed=seed)
            profile = _seeded_profile(names, seed)
            exact_resp = search(snapshot, SearchRequest(query_text=query, profile=profile))
            exact_top = RankedResult(tuple((r.id, r.cpwi) for r in exact_resp.results))
            for margin in spec.margins:
                heur_resp = search(
                    snapshot,
                    SearchRequest(
                        query_text=query, profile=profile,
                        use_cphf=True, margin_percent=margin,
                    ),
                )
                heur_top = RankedResult(tuple((r.id, r.cpwi) for r in heur_resp.results))
                accuracies[margin].append(cphf_accuracy(heur_top, exact_top))
        for margin in spec.margins:
            mean, std = _mean_std(accuracies[margin])
            rows.append([
                spec.experiment.value, sensor_count, prop_count,
                spec.n_requested, margin, len(spec.seeds), mean, std,
            ])
    return header, rows


def run_experiment(spec: ExperimentSpec) -> str:
    """Run one experiment and return its CSV result table."""
    if spec.experiment is Experiment.PHASE_TIMING:
        header, rows = _timing_rows(spec, sweep_predicates=True)
    elif spec.experiment is Experiment.PROPERTY_SCALING:
        header, rows = _timing_rows(spec, sweep_predicates=False)
    elif spec.experiment is Experiment.CPHF_SPEEDUP:
        header, rows = _speedup_rows(spec)
    elif spec.experiment is Experiment.ACCURACY_VS_MARGIN:
        header, rows = _accuracy_rows(spec)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown experiment {spec.experiment!r}")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()
