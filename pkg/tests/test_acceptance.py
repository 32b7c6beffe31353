"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Every expected value is either asserted directly, derived from an
independent brute-force oracle, or a trend over seeded runs. Scale-heavy
criteria carry their own runtime budgets and assert them.
"""

from __future__ import annotations

import csv
import io
import time
from contextlib import contextmanager

import numpy as np
import pytest

from sensorsearch.bench import (
    Experiment,
    ExperimentSpec,
    run_experiment,
    schema_with_properties,
)
from sensorsearch.cphf import build_plan, cphf_accuracy
from sensorsearch.pipeline import SearchRequest, search
from sensorsearch.query import evaluate_filter, parse_query
from sensorsearch.ranking import (
    PriorityEntry,
    PriorityProfile,
    RankedResult,
    WeightVector,
    compute_cpwi,
    normalize,
    rank_sensors,
)
from sensorsearch.registry import default_schema, generate_synthetic

from conftest import oracle_filter, oracle_rank


@contextmanager
def criterion(name: str):
    try:
        yield
    except Exception:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")


def _random_weights(rng: np.random.Generator, names: list[str]) -> dict[str, float]:
    sliders = {name: int(rng.integers(0, 101)) for name in names}
    total = sum(sliders.values())
    if total == 0:
        return {name: 1.0 / len(names) for name in names}
    return {name: s / total for name, s in sliders.items()}


def test_rank_matches_bruteforce_oracle():
    """1000 sensors x 5 properties x 50 seeded profiles: exact agreement."""
    with criterion("oracle-equivalence"):
        start = time.monotonic()
        schema = schema_with_properties(5)
        snapshot = generate_synthetic(1_000, schema, seed=101)
        records = list(snapshot)
        rng = np.random.default_rng(2024)
        names = list(schema.names())
        for case in range(50):
            k = int(rng.integers(1, len(names) + 1))
            checked = sorted(rng.choice(names, size=k, replace=False).tolist())
            weights = _random_weights(rng, checked)
            overrides = {}
            if rng.random() < 0.5:
                for name in checked:
                    if rng.random() < 0.5:
                        overrides[name] = float(rng.uniform(0, 1))
            space = normalize(snapshot.all_candidates(), schema, checked, overrides)
            got = rank_sensors(space, WeightVector(weights))
            expected = oracle_rank(records, schema, checked, weights, overrides)
            assert got.ids() == [sid for sid, _ in expected]
            assert [score for _, score in got] == [score for _, score in expected]
        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"


def test_early_return_on_underfull_filter():
    """Whenever fewer sensors match than requested: unranked + truncated."""
    with criterion("early-return"):
        snapshot = generate_synthetic(2_000, default_schema(), seed=7)
        profile = PriorityProfile(
            entries={
                "accuracy": PriorityEntry(True, 70),
                "reliability": PriorityEntry(True, 30),
            }
        )
        rng = np.random.default_rng(55)
        types = ["temperature", "humidity", "pressure", "light", "soil_moisture",
                 "wind_speed"]
        truncated_seen = 0
        for case in range(200):
            clauses = []
            if rng.random() < 0.7:
                clauses.append(f'type = "{types[rng.integers(0, len(types))]}"')
            if rng.random() < 0.6:
                lo, hi = sorted(rng.uniform(0, 1, size=2))
                clauses.append(f"accuracy between {lo} and {hi}")
            n = int(rng.integers(1, 501))
            clauses.append(f"n = {n}")
            text = " AND ".join(clauses)

            expected_ids = evaluate_filter(snapshot, parse_query(text)).ids()
            response = search(snapshot, SearchRequest(query_text=text, profile=profile))
            if len(expected_ids) < n:
                truncated_seen += 1
                assert response.truncated is True
                assert [r.id for r in response.results] == expected_ids
                assert all(r.cpwi == 0.0 for r in response.results)
            else:
                assert response.truncated is False
                assert len(response.results) == n
        assert truncated_seen >= 20, "query generator produced too few truncations"


def test_cpwi_identities():
    """Zero at the ideal, bounded on normalized inputs, single-dim = sort."""
    with criterion("cpwi-identities"):
        rng = np.random.default_rng(31)
        for case in range(1_000):
            k = int(rng.integers(1, 9))
            names = [f"p{i}" for i in range(k)]
            weights = WeightVector(_random_weights(rng, names))
            x = rng.uniform(0, 1, size=k).tolist()
            assert abs(compute_cpwi(x, x, weights, names)) <= 1e-12
            point = rng.uniform(0, 1, size=k).tolist()
            ideal = rng.uniform(0, 1, size=k).tolist()
            value = compute_cpwi(point, ideal, weights, names)
            assert 0.0 <= value <= 1.0 + 1e-12

        schema = schema_with_properties(1)
        name = schema.names()[0]
        for case in range(1_000):
            case_rng = np.random.default_rng(10_000 + case)
            count = int(case_rng.integers(2, 25))
            snapshot = generate_synthetic(count, schema, seed=20_000 + case)
            space = normalize(snapshot.all_candidates(), schema, [name])
            ranked = rank_sensors(space, WeightVector({name: 1.0}))
            coords = {
                str(sid): float(space.coords[i, 0])
                for i, sid in enumerate(space.sensor_ids)
            }
            expected = sorted(coords, key=lambda sid: (-coords[sid], sid))
            assert ranked.ids() == expected


def test_affine_invariance():
    """a*v+b on raw values and bounds never changes the ranked order."""
    with criterion("affine-invariance"):
        from sensorsearch.registry import (
            Polarity,
            PropertyDef,
            PropertySchema,
            SensorRecord,
            snapshot_from_records,
        )

        rng = np.random.default_rng(404)
        polarities = [Polarity.HIGHER_IS_BETTER, Polarity.LOWER_IS_BETTER]
        for case in range(200):
            k = int(rng.integers(2, 5))
            count = int(rng.integers(10, 80))
            pol = [polarities[int(rng.integers(0, 2))] for _ in range(k)]
            transforms = [
                (float(rng.uniform(0.05, 30.0)), float(rng.uniform(-100.0, 100.0)))
                if rng.random() < 0.7
                else (1.0, 0.0)
                for _ in range(k)
            ]
            raw = rng.uniform(0, 1, size=(count, k))
            names = [f"q{i}" for i in range(k)]
            weights = WeightVector(_random_weights(rng, names))

            rankings = []
            for transformed in (False, True):
                defs, records = [], []
                for j in range(k):
                    a, b = transforms[j] if transformed else (1.0, 0.0)
                    defs.append(
                        PropertyDef(names[j], pol[j], bounds=(b, a + b))
                    )
                schema = PropertySchema(tuple(defs))
                for i in range(count):
                    values = {}
                    for j in range(k):
                        a, b = transforms[j] if transformed else (1.0, 0.0)
                        values[names[j]] = a * raw[i, j] + b
                    records.append(
                        SensorRecord(
                            id=f"s{i:03d}", sensor_type="t", lat=0.0, lon=0.0,
                            values=values,
                        )
                    )
                snapshot = snapshot_from_records(schema, records)
                space = normalize(snapshot.all_candidates(), schema, names)
                rankings.append(rank_sensors(space, weights).ids())
            assert rankings[0] == rankings[1]


def test_cphf_exact_at_full_margin():
    """Keep pool >= candidates: pruned pipeline equals the exhaustive one."""
    with criterion("cphf-exactness"):
        schema = default_schema()
        rng = np.random.default_rng(77)
        for case in range(100):
            count = int(rng.integers(20, 301))
            snapshot = generate_synthetic(count, schema, seed=30_000 + case)
            k = int(rng.integers(1, 9))
            checked = sorted(rng.choice(schema.names(), size=k, replace=False).tolist())
            profile = PriorityProfile(
                entries={
                    name: PriorityEntry(True, int(rng.integers(0, 101)))
                    for name in checked
                }
            )
            n = int(rng.integers(1, max(2, count // 2)))
            margin = 100.0 * count  # guarantees n_keep == count
            exact = search(
                snapshot, SearchRequest(query_text=f"n = {n}", profile=profile)
            )
            pruned = search(
                snapshot,
                SearchRequest(
                    query_text=f"n = {n}", profile=profile,
                    use_cphf=True, margin_percent=margin,
                ),
            )
            assert [(r.id, r.cpwi) for r in exact.results] == [
                (r.id, r.cpwi) for r in pruned.results
            ]
            assert pruned.candidates_indexed == count


def test_accuracy_vs_margin_trend():
    """100k sensors, 30 properties, N=50: accuracy never drops with M and
    saturates to >= 0.99."""
    with criterion("accuracy-vs-margin-trend"):
        start = time.monotonic()
        schema = default_schema()
        names = list(schema.names())
        n_requested = 50
        count = 100_000
        margins = [0.0, 25.0, 50.0, 100.0, 200.0]
        saturating = 100.0 * (count - n_requested) / n_requested

        acc: dict[float, list[float]] = {m: [] for m in margins + [saturating]}
        for seed in range(1, 21):
            snapshot = generate_synthetic(count, schema, seed=seed)
            rng = np.random.default_rng(seed)
            profile = PriorityProfile(
                entries={
                    name: PriorityEntry(True, int(s))
                    for name, s in zip(names, rng.integers(1, 101, size=len(names)))
                }
            )
            request = SearchRequest(query_text=f"n = {n_requested}", profile=profile)
            exact = search(snapshot, request)
            exact_top = RankedResult(tuple((r.id, r.cpwi) for r in exact.results))
            for margin in margins + [saturating]:
                heur = search(
                    snapshot,
                    SearchRequest(
                        query_text=f"n = {n_requested}", profile=profile,
                        use_cphf=True, margin_percent=margin,
                    ),
                )
                heur_top = RankedResult(tuple((r.id, r.cpwi) for r in heur.results))
                acc[margin].append(cphf_accuracy(heur_top, exact_top))

        means = [float(np.mean(acc[m])) for m in margins]
        for i in range(len(means) - 1):
            assert means[i + 1] >= means[i] - 0.02, (
                f"accuracy dipped more than 0.02 between M={margins[i]} "
                f"({means[i]:.4f}) and M={margins[i + 1]} ({means[i + 1]:.4f})"
            )
        saturated_mean = float(np.mean(acc[saturating]))
        assert saturated_mean >= 0.99, f"saturated accuracy {saturated_mean:.4f}"
        elapsed = time.monotonic() - start
        assert elapsed < 300.0, f"took {elapsed:.1f}s, budget 300s"


def test_cphf_faster_than_exact_at_scale():
    """One million sensors, 30 properties, N=50: pruning cannot be slower."""
    with criterion("cphf-speedup-at-scale"):
        start = time.monotonic()
        schema = default_schema()
        snapshot = generate_synthetic(1_000_000, schema, seed=1)
        profile = PriorityProfile(
            entries={name: PriorityEntry(True, 50) for name in schema.names()}
        )
        exact_req = SearchRequest(query_text="n = 50", profile=profile)
        cphf_req = SearchRequest(
            query_text="n = 50", profile=profile, use_cphf=True, margin_percent=0.0
        )
        search(snapshot, exact_req)  # warm-up (also builds the id-rank cache)
        search(snapshot, cphf_req)

        def measure(request):
            totals, last = [], None
            for _ in range(10):
                t0 = time.perf_counter_ns()
                last = search(snapshot, request)
                totals.append((time.perf_counter_ns() - t0) / 1000.0)
            return float(np.mean(totals)), last

        exact_mean, exact_resp = measure(exact_req)
        cphf_mean, cphf_resp = measure(cphf_req)
        assert cphf_mean <= exact_mean, (
            f"CPHF mean {cphf_mean / 1e3:.1f}ms > exact mean {exact_mean / 1e3:.1f}ms"
        )
        weights = {name: 1.0 / 30 for name in schema.names()}
        plan = build_plan(1_000_000, WeightVector(weights), 50, 0.0)
        assert cphf_resp.candidates_indexed == plan.n_keep == 50
        assert cphf_resp.candidates_indexed < 0.001 * 1_000_000
        assert exact_resp.candidates_indexed == 1_000_000
        elapsed = time.monotonic() - start
        assert elapsed < 600.0, f"took {elapsed:.1f}s, budget 600s"


def test_phase_timing_grid_monotonic(tmp_path):
    """Phase-timing CSVs over the full grid; index+rank grows on both axes."""
    with criterion("phase-timing-shape"):
        bands = [
            ((1_000, 10_000), 101),
            ((100_000,), 15),
            ((1_000_000,), 5),
        ]
        cells: dict[tuple[int, int], float] = {}
        for band_counts, reps in bands:
            spec = ExperimentSpec(
                experiment=Experiment.PHASE_TIMING,
                sensor_counts=band_counts,
                property_counts=(5, 10, 20, 30),
                n_requested=50,
                repetitions=reps,
            )
            csv_text = run_experiment(spec)
            out = tmp_path / f"phase_timing_{band_counts[0]}.csv"
            out.write_text(csv_text, encoding="utf-8")
            for row in csv.DictReader(io.StringIO(csv_text)):
                key = (int(row["sensor_count"]), int(row["property_count"]))
                cells[key] = float(row["index_mean_us"]) + float(row["rank_mean_us"])

        sensor_axis = [1_000, 10_000, 100_000, 1_000_000]
        property_axis = [5, 10, 20, 30]
        assert set(cells) == {(n, k) for n in sensor_axis for k in property_axis}
        for k in property_axis:
            seq = [cells[(n, k)] for n in sensor_axis]
            assert all(a <= b for a, b in zip(seq, seq[1:])), (
                f"index+rank not monotone in sensor count at {k} properties: {seq}"
            )
        for n in sensor_axis:
            seq = [cells[(n, k)] for k in property_axis]
            assert all(a <= b for a, b in zip(seq, seq[1:])), (
                f"index+rank not monotone in property count at {n} sensors: {seq}"
            )


def test_filter_matches_linear_scan_oracle():
    """10k sensors x 100 seeded queries: exact agreement with the oracle."""
    with criterion("filter-oracle-equivalence"):
        schema = default_schema()
        snapshot = generate_synthetic(10_000, schema, seed=88)
        records = list(snapshot)
        rng = np.random.default_rng(89)
        names = list(schema.names())
        types = ["temperature", "humidity", "pressure", "light", "soil_moisture",
                 "wind_speed"]
        for case in range(100):
            clauses = []
            n_preds = int(rng.integers(0, 4))
            for _ in range(n_preds):
                kind = int(rng.integers(0, 4))
                if kind == 0:
                    clauses.append(f'type = "{types[rng.integers(0, len(types))]}"')
                elif kind == 1:
                    lo, hi = sorted(rng.uniform(0, 1, size=2))
                    clauses.append(
                        f"{names[rng.integers(0, len(names))]} between {lo} and {hi}"
                    )
                elif kind == 2:
                    lat = float(rng.uniform(-35.5, -35.1))
                    lon = float(rng.uniform(148.9, 149.4))
                    radius = float(rng.uniform(1_000, 30_000))
                    clauses.append(f"within radius({lat}, {lon}, {radius})")
                else:
                    south, north = sorted(rng.uniform(-35.5, -35.1, size=2))
                    west, east = sorted(rng.uniform(148.9, 149.4, size=2))
                    clauses.append(f"within bbox({south}, {west}, {north}, {east})")
            query = parse_query(" AND ".join(clauses))
            got = evaluate_filter(snapshot, query).ids()
            expected = oracle_filter(records, query)
            assert got == expected
