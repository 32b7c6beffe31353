"""Command line interface.

Subcommands: load (validate a catalog file), gen (write a synthetic
catalog), search (one-shot search over a catalog file), serve (HTTP
service), bench (run an experiment to CSV). Results print as JSON on
stdout except where the output itself is a CSV document.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import Experiment, ExperimentSpec, run_experiment, schema_with_properties
from .errors import SensorSearchError
from .pipeline import SearchRequest, SnapshotStore, search
from .ranking import profile_from_dict
from .registry import (
    BoundingBox,
    default_schema,
    export_csv,
    generate_synthetic,
    load_catalog,
    schema_from_json,
)

__all__ = ["main"]


def _guess_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "jsonl" if path.endswith((".jsonl", ".ndjson")) else "csv"


def _read_schema(path: str | None):
    if path is None:
        return default_schema()
    return schema_from_json(Path(path).read_text(encoding="utf-8"))


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_load(args) -> int:
    schema = _read_schema(args.schema)
    text = Path(args.file).read_text(encoding="utf-8")
    snapshot = load_catalog(text, _guess_format(args.file, args.format), schema)
    _emit({
        "file": args.file,
        "sensors": len(snapshot),
        "version": snapshot.version,
        "schema_properties": len(schema),
    })
    return 0


def _cmd_gen(args) -> int:
    schema = _read_schema(args.schema)
    region = BoundingBox(*args.region) if args.region else None
    kwargs = {"region": region} if region else {}
    snapshot = generate_synthetic(args.count, schema, seed=args.seed, **kwargs)
    csv_text = export_csv(snapshot)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        _emit({"out": args.out, "sensors": len(snapshot), "seed": args.seed})
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_search(args) -> int:
    store = SnapshotStore(schema=_read_schema(args.schema))
    text = Path(args.data).read_text(encoding="utf-8")
    snapshot = store.load(text, _guess_format(args.data, args.format))
    profile_doc = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    request = SearchRequest(
        query_text=args.query,
        profile=profile_from_dict(profile_doc),
        use_cphf=args.cphf,
        margin_percent=args.margin,
    )
    response = search(snapshot, request)
    _emit(response.to_dict())
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = SnapshotStore(schema=_read_schema(args.schema))
    if args.data:
        text = Path(args.data).read_text(encoding="utf-8")
        store.load(text, _guess_format(args.data, args.format))
    app = create_app(store, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_bench(args) -> int:
    spec_kwargs = {}
    if args.sensor_counts:
        spec_kwargs["sensor_counts"] = tuple(args.sensor_counts)
    if args.property_counts:
        spec_kwargs["property_counts"] = tuple(args.property_counts)
    if args.margins:
        spec_kwargs["margins"] = tuple(args.margins)
    if args.seeds:
        spec_kwargs["seeds"] = tuple(args.seeds)
    if args.n:
        spec_kwargs["n_requested"] = args.n
    if args.repetitions:
        spec_kwargs["repetitions"] = args.repetitions
    spec = ExperimentSpec(experiment=Experiment(args.experiment), **spec_kwargs)
    csv_text = run_experiment(spec)
    out = args.out or f"{args.experiment}.csv"
    Path(out).write_text(csv_text, encoding="utf-8")
    _emit({"experiment": args.experiment, "out": out,
           "rows": max(0, csv_text.count("\n") - 1)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorsearch",
        description="Context-aware sensor search, selection and ranking engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="validate and summarize a catalog file")
    p.add_argument("file")
    p.add_argument("--schema", help="schema JSON file (default: built-in 30 properties)")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.set_defaults(func=_cmd_load)

    p = sub.add_parser("gen", help="generate a synthetic catalog CSV")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--schema")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--region", type=float, nargs=4,
                   metavar=("SOUTH", "WEST", "NORTH", "EAST"))
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("search", help="run one search over a catalog file")
    p.add_argument("--query", default="")
    p.add_argument("--profile", required=True, help="priority profile JSON file")
    p.add_argument("--data", required=True, help="catalog file to search")
    p.add_argument("--schema")
    p.add_argument("--format", choices=["csv", "jsonl"], help="catalog format")
    p.add_argument("--cphf", action="store_true", help="enable heuristic pruning")
    p.add_argument("--margin", type=float, default=0.0, help="margin of error M%%")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data", help="catalog file to preload")
    p.add_argument("--schema")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--static", help="directory of built UI assets to serve")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("bench", help="run an experiment, write a CSV")
    p.add_argument("experiment", choices=[e.value for e in Experiment])
    p.add_argument("--sensor-counts", type=int, nargs="+")
    p.add_argument("--property-counts", type=int, nargs="+")
    p.add_argument("--n", type=int, help="sensors required per search")
    p.add_argument("--margins", type=float, nargs="+")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--out", help="output CSV path (default: <experiment>.csv)")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SensorSearchError as exc:
        json.dump({"error": type(exc).__name__, "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (OSError, ValueError) as exc:
        json.dump({"error": type(exc).__name__, "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
