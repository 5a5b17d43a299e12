"""Durable, inspectable session storage.

Each session lives in its own directory under the store root:

    <root>/<session_id>/
        session.json     description, history, conversation, model
        model.powl.json  exports, present once a model exists
        model.pnml
        model.bpmn
        model.pcl

Exports are plain files written atomically on every save, so a process
restart serves byte-identical documents. The session record holds prompt
and reply text only; provider credentials never pass through this module.
"""

from __future__ import annotations

import json
import os
import re
import secrets
import tempfile
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .llm import Conversation, Message
from .powl import PowlNode
from .serialize import (MalformedDocumentError, bpmn_export, pnml_export,
                        powl_json_export, powl_json_import)
from .convert import powl_to_bpmn, powl_to_pn

_ID_SHAPE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")

EXPORT_FILES = {
    "powl-json": "model.powl.json",
    "pnml": "model.pnml",
    "bpmn": "model.bpmn",
    "pcl": "model.pcl",
}


class UnknownSessionError(KeyError):
    pass


class SessionDecodeError(Exception):
    """A session directory holds something that is not a session."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class HistoryEvent:
    timestamp: str
    kind: str  # "generated" | "refined" | "failed"
    attempts: int
    detail: str = ""  # feedback text or failure summary


@dataclass
class Session:
    session_id: str
    description: str
    conversation: Conversation = field(default_factory=Conversation)
    model: PowlNode | None = None
    source: str | None = None  # program text the model was built from
    history: list[HistoryEvent] = field(default_factory=list)
    created_at: str = field(default_factory=_now)
    updated_at: str = field(default_factory=_now)

    def record(self, kind: str, attempts: int, detail: str = "") -> None:
        self.history.append(HistoryEvent(_now(), kind, attempts, detail))
        self.updated_at = _now()


def _session_to_jsonable(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "description": session.description,
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "conversation": {
            "iteration_count": session.conversation.iteration_count,
            "messages": [{"role": m.role, "content": m.content}
                         for m in session.conversation.messages],
        },
        "model": (json.loads(powl_json_export(session.model))
                  if session.model is not None else None),
        "source": session.source,
        "history": [{"timestamp": e.timestamp, "kind": e.kind,
                     "attempts": e.attempts, "detail": e.detail}
                    for e in session.history],
    }


def _session_from_jsonable(data: dict) -> Session:
    try:
        conversation = Conversation(
            messages=tuple(Message(m["role"], m["content"])
                           for m in data["conversation"]["messages"]),
            iteration_count=data["conversation"]["iteration_count"],
        )
        model = None
        if data["model"] is not None:
            model = powl_json_import(json.dumps(data["model"]))
        history = [HistoryEvent(e["timestamp"], e["kind"], e["attempts"],
                                e.get("detail", ""))
                   for e in data["history"]]
        return Session(
            session_id=data["session_id"],
            description=data["description"],
            conversation=conversation,
            model=model,
            source=data["source"],
            history=history,
            created_at=data["created_at"],
            updated_at=data["updated_at"],
        )
    except (KeyError, TypeError, MalformedDocumentError) as exc:
        raise SessionDecodeError(f"malformed session record: {exc}") from exc


def _atomic_write(path: Path, data: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_session_dir(directory: str | Path, session: Session) -> None:
    """Persist a session and its exports into one directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if session.model is not None:
        pn = powl_to_pn(session.model)
        _atomic_write(directory / EXPORT_FILES["pnml"], pnml_export(pn))
        _atomic_write(directory / EXPORT_FILES["bpmn"],
                      bpmn_export(powl_to_bpmn(session.model)))
        _atomic_write(directory / EXPORT_FILES["powl-json"],
                      powl_json_export(session.model))
        _atomic_write(directory / EXPORT_FILES["pcl"], session.source or "")
    # session.json last: its presence marks a complete record
    _atomic_write(directory / "session.json",
                  json.dumps(_session_to_jsonable(session), indent=2))


def read_session_dir(directory: str | Path) -> Session:
    directory = Path(directory)
    record = directory / "session.json"
    if not record.is_file():
        raise UnknownSessionError(str(directory))
    try:
        data = json.loads(record.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SessionDecodeError(f"{record}: not valid JSON: {exc}") from exc
    return _session_from_jsonable(data)


class SessionStore:
    """Directory-per-session store with per-session exclusive locks."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def new_session(self, description: str) -> Session:
        """Create an in-memory session; nothing is on disk until save()."""
        return Session(session_id=secrets.token_urlsafe(16),
                       description=description)

    def _dir(self, session_id: str) -> Path:
        if not _ID_SHAPE.match(session_id):
            raise UnknownSessionError(session_id)
        return self.root / session_id

    def exists(self, session_id: str) -> bool:
        try:
            return (self._dir(session_id) / "session.json").is_file()
        except UnknownSessionError:
            return False

    def save(self, session: Session) -> None:
        write_session_dir(self._dir(session.session_id), session)

    def load(self, session_id: str) -> Session:
        return read_session_dir(self._dir(session_id))

    def export_path(self, session_id: str, fmt: str) -> Path:
        return self._dir(session_id) / EXPORT_FILES[fmt]

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "session.json").is_file())
