"""Read-only HTTP service over one loaded map.

All state is immutable after startup, so every endpoint is a pure
function of (map, request); reloading a different map means restarting
the process.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import Vocabulary, canonical_json
from .errors import UnknownIdError, UnmappableTextError
from .knowledge_map import (
    MAP_SCHEMA_VERSION,
    KnowledgeMap,
    locate_text,
    neighbors,
    project_to_view,
    relevance,
)

API_VERSION = 1


class LocateBody(BaseModel):
    text: str


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def default_ui_dir() -> Path:
    return Path(__file__).parent / "static"


def create_app(kmap: KnowledgeMap, vocab: Vocabulary, ui_dir=None) -> FastAPI:
    app = FastAPI(title="docmap", docs_url=None, redoc_url=None)
    provenance_hash = hashlib.sha256(canonical_json(kmap.provenance).encode()).hexdigest()

    @app.exception_handler(UnknownIdError)
    async def _unknown_id(request, exc):
        return _error(404, "unknown_id", str(exc))

    @app.exception_handler(UnmappableTextError)
    async def _unmappable(request, exc):
        return _error(422, "unmappable", str(exc))

    @app.exception_handler(ValueError)
    async def _bad_value(request, exc):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request, exc):
        return _error(400, "bad_request", str(exc))

    @app.get("/api/map/meta")
    def map_meta():
        return {
            "dim": kmap.dim,
            "entry_count": len(kmap.entries),
            "provenance_hash": provenance_hash,
            "schema_version": MAP_SCHEMA_VERSION,
            "api_version": API_VERSION,
        }

    @app.get("/api/docs/{doc_id:path}")
    def get_doc(doc_id: str):
        if doc_id not in kmap.entries:
            raise UnknownIdError(f"unknown document id: {doc_id!r}")
        return {
            "id": doc_id,
            "coords": [float(x) for x in kmap.entries[doc_id]],
            "label": kmap.annotations.get(doc_id),
        }

    @app.get("/api/neighbors")
    def get_neighbors(k: int, id: str | None = None, coords: str | None = None):
        if (id is None) == (coords is None):
            raise ValueError("provide exactly one of id= or coords=")
        query = id if id is not None else [float(x) for x in coords.split(",")]
        return [
            {"doc_id": r.doc_id, "distance": r.distance, "rank": r.rank}
            for r in neighbors(kmap, query, k)
        ]

    @app.get("/api/relevance")
    def get_relevance(a: str, b: str):
        return {"a": a, "b": b, "distance": relevance(kmap, a, b)}

    @app.post("/api/locate")
    def post_locate(body: LocateBody):
        coords = locate_text(kmap, body.text, vocab)
        return {"coords": [float(x) for x in coords]}

    @app.get("/api/view")
    def get_view(dim: int = 2):
        view = project_to_view(kmap, dim)
        return {
            "target_dim": view.target_dim,
            "basis": [[float(x) for x in row] for row in view.basis],
            "center": [float(x) for x in view.center],
            "view_coords": {k: [float(x) for x in v] for k, v in view.view_coords.items()},
            "labels": kmap.annotations,
        }

    @app.get("/api/stability")
    def get_stability():
        return {"reports": kmap.provenance.get("stability_reports", [])}

    ui = Path(ui_dir) if ui_dir else default_ui_dir()
    if ui.is_dir() and (ui / "index.html").exists():
        app.mount("/", StaticFiles(directory=ui, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return {"service": "docmap", "api": "/api", "ui": "not built"}

    return app
