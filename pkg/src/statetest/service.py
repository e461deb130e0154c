"""Local HTTP API for interactive simulation sessions.

In-memory only: models and sessions live in LRU-bounded dicts and vanish on
restart. Requests to one session are serialized by a per-session lock; the
service adds no semantics of its own on top of the simulator.
"""
from __future__ import annotations

import threading
import uuid
from collections import OrderedDict
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import frontend
from .model import FINAL, ValidationError, format_expr, validate, ValidatedModel
from .simulator import Session, SimulatorError, Status

DEFAULT_PORT = 8732
DEFAULT_MODEL_CAP = 64
DEFAULT_SESSION_CAP = 256
DEFAULT_BODY_LIMIT = 256 * 1024


class _LruStore:
    """Insertion-capped store: inserting past the cap evicts the least
    recently used entry. Reads refresh recency."""

    def __init__(self, cap: int):
        self.cap = cap
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def put(self, key, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.cap:
                self._data.popitem(last=False)

    def get(self, key):
        with self._lock:
            if key not in self._data:
                return None
            self._data.move_to_end(key)
            return self._data[key]


class _LiveSession:
    def __init__(self, session_id: str, model_id: str, session: Session):
        self.id = session_id
        self.model_id = model_id
        self.session = session
        self.lock = threading.Lock()


def diagram_view(vm: ValidatedModel) -> dict:
    """Topology projection for client-side rendering."""
    model = vm.model
    has_final = any(
        t.target == FINAL for s in model.states for t in s.transitions
    )
    states = [
        {
            "name": s.name,
            "is_initial": s.name == model.initial_target,
            "is_final": False,
        }
        for s in model.states
    ]
    if has_final:
        states.append({"name": FINAL, "is_initial": False, "is_final": True})
    transitions = []
    for s in model.states:
        for index, t in enumerate(s.transitions):
            label_parts = []
            if t.trigger is not None:
                label_parts.append(t.trigger)
            if t.guard is not None:
                label_parts.append(f"[{format_expr(t.guard)}]")
            transitions.append(
                {
                    "source": s.name,
                    "target": t.target,
                    "label": " ".join(label_parts),
                    "decl_index": index,
                }
            )
    return {"states": states, "transitions": transitions}


def _session_view(live: _LiveSession, taken=None) -> dict:
    s = live.session
    view = {
        "session_id": live.id,
        "active": s.active,
        "env": dict(s.env),
        "status": s.status.value,
    }
    if taken is not None:
        view["taken"] = [
            {"source": src, "target": dst, "decl_index": idx} for src, dst, idx in taken
        ]
    return view


def _error(status: int, code: str, message: str, diagnostics=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if diagnostics is not None:
        body["diagnostics"] = [d.to_dict() for d in diagnostics]
    return JSONResponse(status_code=status, content=body)


def create_app(
    model_cap: int = DEFAULT_MODEL_CAP,
    session_cap: int = DEFAULT_SESSION_CAP,
    body_limit: int = DEFAULT_BODY_LIMIT,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="statetest simulation service")
    models = _LruStore(model_cap)
    sessions = _LruStore(session_cap)

    @app.post("/models")
    async def post_model(request: Request):
        raw = await request.body()
        if len(raw) > body_limit:
            return _error(413, "E_TOO_LARGE", f"body exceeds {body_limit} bytes")
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            return _error(422, "E_LEXICAL", "body is not valid UTF-8")
        try:
            model = frontend.parse_statechart(frontend.SourceText(text))
            vm = validate(model)
        except (frontend.ParseError, ValidationError) as exc:
            return _error(
                422, "E_INVALID_MODEL", "model does not parse or validate",
                diagnostics=exc.diagnostics,
            )
        model_id = uuid.uuid4().hex
        models.put(model_id, vm)
        return {"model_id": model_id, "diagram": diagram_view(vm)}

    @app.post("/sessions")
    def post_session(body: dict):
        model_id = body.get("model_id")
        vm = models.get(model_id) if isinstance(model_id, str) else None
        if vm is None:
            return _error(404, "E_UNKNOWN_MODEL", f"unknown model_id {model_id!r}")
        session = Session(vm)
        try:
            session.enter()
        except SimulatorError as exc:
            return _error(409, exc.code, str(exc))
        live = _LiveSession(uuid.uuid4().hex, model_id, session)
        sessions.put(live.id, live)
        return _session_view(live)

    @app.post("/sessions/{session_id}/stimulus")
    def post_stimulus(session_id: str, body: dict):
        live = sessions.get(session_id)
        if live is None:
            return _error(404, "E_UNKNOWN_SESSION", f"unknown session {session_id!r}")
        kind = body.get("kind")
        name = body.get("name")
        if kind not in ("set_var", "raise") or not isinstance(name, str):
            return _error(422, "E_BAD_STIMULUS", "kind must be 'set_var' or 'raise' with a name")
        with live.lock:
            s = live.session
            if s.status in (Status.FINALIZED, Status.FAULTED):
                return _error(409, "E_NOT_RUNNING", f"session is {s.status.value}")
            trace_len = len(s.trace)
            try:
                if kind == "set_var":
                    if type(body.get("value")) not in (int, bool):
                        return _error(422, "E_TYPE", "value must be an integer or boolean")
                    s.set_variable(name, body["value"])
                else:
                    s.raise_event(name)
            except SimulatorError as exc:
                if exc.code == "E_MICROSTEP_LIMIT":
                    return _error(409, exc.code, str(exc))
                return _error(422, exc.code, str(exc))
            taken = s.trace[trace_len].taken if len(s.trace) > trace_len else ()
            return _session_view(live, taken=taken)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        live = sessions.get(session_id)
        if live is None:
            return _error(404, "E_UNKNOWN_SESSION", f"unknown session {session_id!r}")
        with live.lock:
            view = _session_view(live)
            view["trace"] = [
                {
                    "stimulus": list(entry.stimulus),
                    "taken": [
                        {"source": src, "target": dst, "decl_index": idx}
                        for src, dst, idx in entry.taken
                    ],
                    "active": entry.resulting_active,
                }
                for entry in live.session.trace
            ]
            return view

    @app.post("/sessions/{session_id}/reset")
    def reset_session(session_id: str):
        live = sessions.get(session_id)
        if live is None:
            return _error(404, "E_UNKNOWN_SESSION", f"unknown session {session_id!r}")
        with live.lock:
            try:
                live.session.reset()
            except SimulatorError as exc:
                return _error(409, exc.code, str(exc))
            return _session_view(live)

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        vm = models.get(model_id)
        if vm is None:
            return _error(404, "E_UNKNOWN_MODEL", f"unknown model_id {model_id!r}")
        return {"model_id": model_id, "name": vm.name, "diagram": diagram_view(vm)}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
