"""Durable session storage: one JSON file per session, written atomically,
with non-blocking per-session locks so concurrent writers get a clean
busy signal instead of interleaved turns.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
import uuid
from collections.abc import Callable
from pathlib import Path

from .engine import Session
from .goals import Repository


class SessionNotFound(Exception):
    pass


class SessionStore:
    def __init__(self, directory: Path | str, repo_provider: Callable[[], Repository]):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._repo_provider = repo_provider
        self._locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()

    def _path(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or "." in session_id:
            raise SessionNotFound(session_id)
        return self.directory / f"{session_id}.json"

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry:
            return self._locks.setdefault(session_id, threading.Lock())

    def create(self) -> Session:
        now = time.time()
        session = Session(session_id=uuid.uuid4().hex[:16], created_at=now, updated_at=now)
        self.save(session)
        return session

    def load(self, session_id: str) -> Session:
        path = self._path(session_id)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise SessionNotFound(session_id) from None
        return Session.from_dict(data, self._repo_provider())

    def save(self, session: Session) -> None:
        path = self._path(session.session_id)
        payload = json.dumps(session.to_dict(), ensure_ascii=False, indent=2)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def exists(self, session_id: str) -> bool:
        try:
            return self._path(session_id).exists()
        except SessionNotFound:
            return False

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json") if not p.name.startswith("."))

    def try_acquire(self, session_id: str) -> bool:
        """Grab the per-session lock without blocking; False means busy."""
        return self._lock_for(session_id).acquire(blocking=False)

    def release(self, session_id: str) -> None:
        lock = self._lock_for(session_id)
        if lock.locked():
            lock.release()
