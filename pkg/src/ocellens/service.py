"""HTTP session service: upload a log, apply operations with versioned
undo, fetch catalogs, DFGs, DOT, and canonical exports.

Every session holds a stack of immutable log snapshots (version 0 is the
upload) plus the operation history aligned with versions 1..n. A failed
operation never appends a version, and replaying the history over version
0 reproduces the head exactly, which is also how optional on-disk state is
rehydrated after a restart.
"""
from __future__ import annotations

import json
import os
import shutil
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import ops
from .discovery import dfg_to_json, discover_ocdfg, render_dot
from .errors import (
    JsonSyntaxError,
    MalformedTypeName,
    OperationError,
    SchemaError,
    ValidationError,
)
from .model import OcelLog, TypeHierarchy, type_catalog
from .ocel_json import read_ocel_json, write_ocel_json
from .typenames import encode_event_type, encode_object_type

DEFAULT_ADDR = "127.0.0.1:8787"
DEFAULT_MAX_UPLOAD = 64 * 1024 * 1024
DEFAULT_TTL_SECONDS = 24 * 60 * 60
DEFAULT_MAX_VERSIONS = 64


@dataclass
class ServiceConfig:
    addr: str = DEFAULT_ADDR
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD
    state_dir: str | None = None
    ttl_seconds: float = DEFAULT_TTL_SECONDS
    max_versions: int = DEFAULT_MAX_VERSIONS
    ui_dir: str | None = None

    @staticmethod
    def from_env(env=os.environ) -> "ServiceConfig":
        return ServiceConfig(
            addr=env.get("OCELLENS_ADDR", DEFAULT_ADDR),
            max_upload_bytes=int(
                env.get("OCELLENS_MAX_UPLOAD_BYTES", DEFAULT_MAX_UPLOAD)
            ),
            state_dir=env.get("OCELLENS_STATE_DIR") or None,
            ttl_seconds=float(env.get("OCELLENS_TTL_SECONDS", DEFAULT_TTL_SECONDS)),
            max_versions=int(env.get("OCELLENS_MAX_VERSIONS", DEFAULT_MAX_VERSIONS)),
            ui_dir=env.get("OCELLENS_UI_DIR") or None,
        )


@dataclass
class Session:
    session_id: str
    versions: list[OcelLog]
    history: list[ops.OperationRequest]
    created_at: float
    last_access: float
    lock: threading.Lock = field(default_factory=threading.Lock)


def catalog_to_json(catalog: TypeHierarchy) -> dict:
    def node_to_json(node):
        return {
            "type": encode_object_type(node.otype),
            "count": node.count,
            "drillable": list(node.drillable),
            "children": [node_to_json(c) for c in node.children],
        }

    return {
        "object_types": [
            {"base": base, "tree": node_to_json(root)}
            for base, root in catalog.object_types
        ],
        "event_types": [
            {
                "base": base,
                "variants": [
                    {"type": encode_event_type(v.etype), "count": v.count}
                    for v in variants
                ],
            }
            for base, variants in catalog.event_types
        ],
    }


def summarize(log: OcelLog) -> dict:
    return {
        "events": len(log.events),
        "objects": len(log.objects),
        "e2o": len(log.e2o),
        "o2o": len(log.o2o),
        "event_types": sorted(encode_event_type(t) for t in log.etypes),
        "object_types": sorted(encode_object_type(t) for t in log.otypes),
        "catalog": catalog_to_json(type_catalog(log)),
    }


class SessionStore:
    """In-memory sessions with idle expiry and optional write-behind.

    When a state directory is configured, each mutation rewrites the
    session's canonical version-0 log plus a history manifest; rehydration
    replays the manifest, relying on the operations being deterministic.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if config.state_dir:
            os.makedirs(config.state_dir, exist_ok=True)
            self._rehydrate()

    def create(self, log: OcelLog) -> Session:
        session = Session(
            session_id=uuid.uuid4().hex,
            versions=[log],
            history=[],
            created_at=time.time(),
            last_access=time.time(),
        )
        with self._lock:
            self._sessions[session.session_id] = session
        self.persist(session, log_changed=True)
        return session

    def get(self, session_id: str) -> Session | None:
        now = time.time()
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return None
            if now - session.last_access > self.config.ttl_seconds:
                del self._sessions[session_id]
                self._drop_state(session_id)
                return None
            session.last_access = now
            return session

    def _session_dir(self, session_id: str) -> str:
        return os.path.join(self.config.state_dir, session_id)

    def persist(self, session: Session, log_changed: bool = False):
        if not self.config.state_dir:
            return
        directory = self._session_dir(session.session_id)
        os.makedirs(directory, exist_ok=True)
        if log_changed:
            with open(os.path.join(directory, "log.jsonocel"), "wb") as handle:
                handle.write(write_ocel_json(session.versions[0]))
        manifest = {
            "session_id": session.session_id,
            "created_at": session.created_at,
            "last_access": session.last_access,
            "history": [ops.request_to_json(r) for r in session.history],
        }
        path = os.path.join(directory, "manifest.json")
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, sort_keys=True, indent=2)
        os.replace(tmp, path)

    def _drop_state(self, session_id: str):
        if not self.config.state_dir:
            return
        shutil.rmtree(self._session_dir(session_id), ignore_errors=True)

    def _rehydrate(self):
        for name in sorted(os.listdir(self.config.state_dir)):
            directory = os.path.join(self.config.state_dir, name)
            manifest_path = os.path.join(directory, "manifest.json")
            log_path = os.path.join(directory, "log.jsonocel")
            if not (os.path.isfile(manifest_path) and os.path.isfile(log_path)):
                continue
            try:
                with open(manifest_path, encoding="utf-8") as handle:
                    manifest = json.load(handle)
                with open(log_path, "rb") as handle:
                    log = read_ocel_json(handle.read())
                history = [ops.request_from_json(r) for r in manifest["history"]]
                versions = [log]
                for request in history:
                    versions.append(ops.apply(versions[-1], request))
            except Exception:
                continue  # a broken snapshot must not block startup
            self._sessions[name] = Session(
                session_id=name,
                versions=versions,
                history=history,
                created_at=float(manifest.get("created_at", time.time())),
                last_access=float(manifest.get("last_access", time.time())),
            )


def _error(status: int, name: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": name, "message": message, **extra}
    )


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    store = SessionStore(config)
    app = FastAPI(title="ocellens", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.config = config

    def _load(session_id: str) -> Session | None:
        return store.get(session_id)

    def _version_of(session: Session, raw: str | None):
        if raw is None:
            return len(session.versions) - 1
        try:
            version = int(raw)
        except ValueError:
            return None
        if 0 <= version < len(session.versions):
            return version
        return None

    @app.post("/api/sessions")
    async def create_session(request: Request):
        body = await request.body()
        if len(body) > config.max_upload_bytes:
            return _error(413, "PayloadTooLarge", "upload exceeds configured limit")
        try:
            log = read_ocel_json(body)
        except ValidationError as exc:
            return _error(
                400,
                "ValidationError",
                str(exc),
                violations=[
                    {"rule": v.rule, "message": v.message, "ids": list(v.ids)}
                    for v in exc.report.violations
                ],
            )
        except (JsonSyntaxError, SchemaError, MalformedTypeName) as exc:
            return _error(400, type(exc).__name__, str(exc))
        session = store.create(log)
        return {"session_id": session.session_id, "version": 0, "summary": summarize(log)}

    @app.get("/api/sessions/{session_id}")
    def session_info(session_id: str):
        session = _load(session_id)
        if session is None:
            return _error(404, "UnknownSession", session_id)
        with session.lock:
            head = len(session.versions) - 1
            return {
                "session_id": session.session_id,
                "version": head,
                "history": [ops.request_to_json(r) for r in session.history],
                "summary": summarize(session.versions[head]),
            }

    @app.post("/api/sessions/{session_id}/operations")
    async def apply_operation(session_id: str, request: Request):
        session = _load(session_id)
        if session is None:
            return _error(404, "UnknownSession", session_id)
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(422, "MalformedRequest", f"body is not JSON: {exc}")
        with session.lock:
            if len(session.versions) >= config.max_versions:
                return _error(
                    409, "VersionLimit", "session reached its version cap"
                )
            try:
                operation = ops.request_from_json(body)
                new_log = ops.apply(session.versions[-1], operation)
            except OperationError as exc:
                return _error(422, type(exc).__name__, str(exc))
            session.versions.append(new_log)
            session.history.append(operation)
            store.persist(session)
            version = len(session.versions) - 1
            return {
                "version": version,
                "summary": summarize(new_log),
                "dfg": dfg_to_json(discover_ocdfg(new_log)),
            }

    @app.post("/api/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = _load(session_id)
        if session is None:
            return _error(404, "UnknownSession", session_id)
        with session.lock:
            if len(session.versions) == 1:
                return _error(409, "NothingToUndo", "already at version 0")
            session.versions.pop()
            session.history.pop()
            store.persist(session)
            return {"version": len(session.versions) - 1}

    @app.get("/api/sessions/{session_id}/dfg")
    def get_dfg(session_id: str, version: str | None = None, min_arc_frequency: int = 1):
        session = _load(session_id)
        if session is None:
            return _error(404, "UnknownSession", session_id)
        with session.lock:
            idx = _version_of(session, version)
            if idx is None:
                return _error(404, "UnknownVersion", str(version))
            if min_arc_frequency < 1:
                return _error(422, "BadThreshold", "min_arc_frequency must be >= 1")
            return dfg_to_json(
                discover_ocdfg(session.versions[idx]), min_arc_frequency
            )

    @app.get("/api/sessions/{session_id}/dot")
    def get_dot(session_id: str, version: str | None = None, min_arc_frequency: int = 1):
        session = _load(session_id)
        if session is None:
            return _error(404, "UnknownSession", session_id)
        with session.lock:
            idx = _version_of(session, version)
            if idx is None:
                return _error(404, "UnknownVersion", str(version))
            if min_arc_frequency < 1:
                return _error(422, "BadThreshold", "min_arc_frequency must be >= 1")
            text = render_dot(
                discover_ocdfg(session.versions[idx]), min_arc_frequency
            )
            return PlainTextResponse(text, media_type="text/vnd.graphviz")

    @app.get("/api/sessions/{session_id}/log")
    def export_log(session_id: str, version: str | None = None):
        session = _load(session_id)
        if session is None:
            return _error(404, "UnknownSession", session_id)
        with session.lock:
            idx = _version_of(session, version)
            if idx is None:
                return _error(404, "UnknownVersion", str(version))
            data = write_ocel_json(session.versions[idx])
            return Response(content=data, media_type="application/json")

    if config.ui_dir and os.path.isdir(config.ui_dir):
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig | None = None):
    """Run the service under uvicorn at the configured bind address."""
    import uvicorn

    config = config or ServiceConfig.from_env()
    host, _, port = config.addr.rpartition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port))
