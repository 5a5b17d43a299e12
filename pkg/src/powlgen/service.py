"""Session-oriented HTTP service: describe, inspect, refine, export.

All error responses share one shape: {"kind": ..., "message": ...,
"location"?: ...}. Generation and refinement run on worker threads and
hold only the affected session's lock, so independent sessions progress
concurrently. Exports are served from the files the store wrote, which
makes them stable across restarts.
"""

from __future__ import annotations

import json
import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from starlette.concurrency import run_in_threadpool

from . import llm
from .config import AppConfig, build_provider
from .convert import to_render_graph
from .pcl import PclError
from .powl import stats
from .serialize import powl_json_export
from .sessions import Session, SessionStore, UnknownSessionError

log = logging.getLogger("powlgen.service")

# generous: an in-flight generation may hold the session lock through
# several provider calls
LOCK_TIMEOUT_S = 600.0

MEDIA_TYPES = {
    "powl-json": "application/json",
    "pnml": "application/xml",
    "bpmn": "application/xml",
    "pcl": "text/plain; charset=utf-8",
}

RENDER_VIEWS = ("bpmn", "pn")


def _error(status: int, kind: str, message: str,
           location: str | None = None) -> JSONResponse:
    body: dict = {"kind": kind, "message": message}
    if location is not None:
        body["location"] = location
    return JSONResponse(status_code=status, content=body)


def _exhausted_response(exc: llm.GenerationExhausted) -> JSONResponse:
    location = None
    message = str(exc)
    if isinstance(exc.last_error, PclError):
        message = exc.last_error.message
        location = f"line {exc.last_error.line}, column {exc.last_error.col}"
    elif exc.last_error is not None:
        message = str(exc.last_error)
    return _error(422, "generation-exhausted", message, location)


def _session_body(session: Session, attempts: int, status: int) -> JSONResponse:
    assert session.model is not None
    s = stats(session.model)
    return JSONResponse(status_code=status, content={
        "session_id": session.session_id,
        "attempts": attempts,
        "stats": {
            "activity_count": s.activity_count,
            "operator_count": s.operator_count,
            "depth": s.depth,
            "silent_count": s.silent_count,
        },
        "model": json.loads(powl_json_export(session.model)),
    })


def create_app(config: AppConfig | None = None,
               provider: llm.Provider | None = None) -> FastAPI:
    config = config or AppConfig()
    if provider is None:
        provider = build_provider(config)
    store = SessionStore(config.store_dir)

    app = FastAPI(title="powlgen", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.provider = provider
    app.state.store = store

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def bad_params(request: Request, exc: RequestValidationError):
        return _error(400, "bad-request", "invalid request parameters")

    def _do_generate(description: str) -> Response:
        session = store.new_session(description)
        lock = store.lock(session.session_id)
        if not lock.acquire(timeout=LOCK_TIMEOUT_S):
            return _error(409, "busy", "session is busy")
        try:
            try:
                result = llm.generate(provider, description,
                                      max_iterations=config.max_iterations)
            except llm.PromptError as exc:
                return _error(400, "bad-request", str(exc))
            except llm.ProviderError as exc:
                log.error("session %s: provider failure", session.session_id)
                return _error(502, "provider-error", str(exc))
            except llm.GenerationExhausted as exc:
                session.conversation = exc.conversation
                session.record("failed", exc.attempts, str(exc.last_error))
                store.save(session)
                log.info("session %s: generation exhausted after %d attempts",
                         session.session_id, exc.attempts)
                return _exhausted_response(exc)
            session.conversation = result.conversation
            session.model = result.model
            session.source = result.source
            session.record("generated", result.attempts)
            store.save(session)
        finally:
            lock.release()
        log.info("session %s: model generated in %d attempt(s)",
                 session.session_id, result.attempts)
        return _session_body(session, result.attempts, status=201)

    def _do_refine(session_id: str, feedback: str) -> Response:
        lock = store.lock(session_id)
        if not lock.acquire(timeout=LOCK_TIMEOUT_S):
            return _error(409, "busy", "session is busy")
        try:
            try:
                session = store.load(session_id)
            except UnknownSessionError:
                return _error(404, "unknown-session",
                              f"no session {session_id!r}")
            if session.model is None:
                return _error(409, "no-model",
                              "session has no model to refine")
            try:
                result = llm.refine(provider, session.conversation, feedback,
                                    max_iterations=config.max_iterations)
            except llm.PromptError as exc:
                return _error(400, "bad-request", str(exc))
            except llm.ProviderError as exc:
                log.error("session %s: provider failure", session_id)
                return _error(502, "provider-error", str(exc))
            except llm.GenerationExhausted as exc:
                session.conversation = exc.conversation
                session.record("failed", exc.attempts, str(exc.last_error))
                store.save(session)  # keeps the previous model
                return _exhausted_response(exc)
            session.conversation = result.conversation
            session.model = result.model
            session.source = result.source
            session.record("refined", result.attempts, detail=feedback)
            store.save(session)
        finally:
            lock.release()
        log.info("session %s: model refined in %d attempt(s)",
                 session_id, result.attempts)
        return _session_body(session, result.attempts, status=200)

    @app.post("/api/sessions")
    async def create_session(request: Request):
        try:
            data = json.loads(await request.body())
        except ValueError:
            data = None
        if not isinstance(data, dict):
            return _error(400, "bad-request", "body must be a JSON object")
        description = data.get("description")
        if not isinstance(description, str) or not description.strip():
            return _error(400, "bad-request",
                          "a non-empty 'description' string is required")
        return await run_in_threadpool(_do_generate, description)

    @app.post("/api/sessions/{session_id}/feedback")
    async def submit_feedback(session_id: str, request: Request):
        try:
            data = json.loads(await request.body())
        except ValueError:
            data = None
        if not isinstance(data, dict):
            return _error(400, "bad-request", "body must be a JSON object")
        feedback = data.get("feedback")
        if not isinstance(feedback, str) or not feedback.strip():
            return _error(400, "bad-request",
                          "a non-empty 'feedback' string is required")
        return await run_in_threadpool(_do_refine, session_id, feedback)

    @app.get("/api/sessions/{session_id}/model")
    def get_model(session_id: str, format: str = "powl-json",
                  view: str = "bpmn"):
        if format not in (*MEDIA_TYPES, "render-json"):
            return _error(400, "bad-request",
                          f"unknown format {format!r}; expected one of "
                          f"powl-json, pnml, bpmn, pcl, render-json")
        if view not in RENDER_VIEWS:
            return _error(400, "bad-request",
                          f"unknown view {view!r}; expected bpmn or pn")
        try:
            session = store.load(session_id)
        except UnknownSessionError:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        if session.model is None:
            return _error(409, "no-model", "session has no model")
        if format == "render-json":
            graph = to_render_graph(session.model, view=view)
            return JSONResponse(content={
                "view": view,
                "nodes": [{"id": n.node_id, "kind": n.kind,
                           "label": n.label, "rank": n.rank}
                          for n in graph.nodes],
                "edges": [{"source": s, "target": t}
                          for s, t in graph.edges],
            })
        # serve the persisted export untouched: byte-stable across restarts
        payload = store.export_path(session_id, format).read_bytes()
        return Response(content=payload, media_type=MEDIA_TYPES[format])

    @app.get("/api/sessions/{session_id}/history")
    def get_history(session_id: str, include_conversation: bool = False):
        try:
            session = store.load(session_id)
        except UnknownSessionError:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        body = {
            "session_id": session.session_id,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "events": [{"timestamp": e.timestamp, "kind": e.kind,
                        "attempts": e.attempts, "detail": e.detail}
                       for e in session.history],
        }
        if include_conversation:
            body["conversation"] = [
                {"role": m.role, "content": m.content}
                for m in session.conversation.messages]
        return JSONResponse(content=body)

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True),
                  name="ui")

    return app
