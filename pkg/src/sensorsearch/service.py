"""HTTP API over the search pipeline.

Endpoints:
  GET  /health                         liveness + active snapshot version
  GET  /schema                         active property schema document
  GET  /sensors/{id}                   one sensor record
  POST /sensors/bulk?format=csv|jsonl  load a catalog (atomic swap)
  POST /search[?format=csv]            run a search
  POST /profile/echo                   normalize a profile and show its weights

Before the first catalog load every data endpoint answers 503.
"""

from __future__ import annotations

import io
import csv
import json
import math
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .errors import NoCheckedProperties, NoSnapshot, SensorSearchError
from .pipeline import SearchRequest, SearchResponse, SnapshotStore, search
from .ranking import compute_weights, profile_from_dict, profile_to_dict
from .registry import PropertySchema, schema_to_json

__all__ = ["create_app"]


def _schema_doc(schema: PropertySchema) -> dict:
    return json.loads(schema_to_json(schema))


def _search_csv(response: SearchResponse, schema: PropertySchema) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    names = schema.names()
    writer.writerow(["rank", "id", "cpwi", "type", "lat", "lon", *names])
    for rank, entry in enumerate(response.results, start=1):
        row = [rank, entry.id, repr(entry.cpwi), entry.sensor_type,
               repr(entry.lat), repr(entry.lon)]
        for name in names:
            v = entry.values.get(name)
            row.append("" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(v))
        writer.writerow(row)
    return out.getvalue()


def create_app(
    store: SnapshotStore | None = None,
    static_dir: Path | str | None = None,
) -> FastAPI:
    """Build the service around a snapshot store.

    When static_dir points at a built frontend, its assets are served from
    the root path; API routes take precedence.
    """
    store = store or SnapshotStore()
    app = FastAPI(title="sensorsearch", docs_url=None, redoc_url=None)
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(SensorSearchError)
    async def _domain_error(_request: Request, exc: SensorSearchError):
        status = 503 if isinstance(exc, NoSnapshot) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": str(exc)},
        )

    @app.get("/health")
    def health():
        snapshot = store.current()
        if snapshot is None:
            return JSONResponse(status_code=503, content={"status": "no_snapshot"})
        return {
            "status": "ok",
            "version": snapshot.version,
            "sensors": len(snapshot),
        }

    @app.get("/schema")
    def schema():
        snapshot = store.require()
        doc = _schema_doc(snapshot.schema)
        doc["version"] = snapshot.version
        return doc

    @app.get("/sensors/{sensor_id}")
    def sensor(sensor_id: str):
        snapshot = store.require()
        record = snapshot.get(sensor_id)
        if record is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NotFound", "detail": f"no sensor {sensor_id!r}"},
            )
        return {
            "id": record.id,
            "type": record.sensor_type,
            "lat": record.lat,
            "lon": record.lon,
            "values": dict(record.values),
        }

    @app.post("/sensors/bulk")
    async def bulk_load(request: Request, format: str = Query("csv")):
        body = await request.body()
        snapshot = store.load(body, format)
        return {"version": snapshot.version, "sensors": len(snapshot)}

    @app.post("/search")
    async def run_search(request: Request, format: str = Query("json")):
        snapshot = store.require()
        doc = await request.json()
        response = search(snapshot, SearchRequest.from_dict(doc))
        if format == "csv":
            return PlainTextResponse(
                _search_csv(response, snapshot.schema), media_type="text/csv"
            )
        return response.to_dict()

    @app.post("/profile/echo")
    async def profile_echo(request: Request):
        doc = await request.json()
        profile = profile_from_dict(doc)
        try:
            weights = dict(compute_weights(profile).weights)
        except NoCheckedProperties:
            weights = None
        return {"profile": profile_to_dict(profile), "weights": weights}

    if static_dir is not None:
        static_path = Path(static_dir)
        if static_path.is_dir():
            app.mount("/", StaticFiles(directory=static_path, html=True), name="ui")

    return app
