"""File-backed persistence for the service.

Layout under one data directory:

    corpus.jsonl                      clip corpus (one JSON clip per line)
    users/<user>.json                 user record
    sessions/<sid>.meta.json          session header (participant, domain, seed, clip ids)
    sessions/<sid>.log.jsonl          append-only answer log (one JSON line each)
    models/<user>__<domain>.json      learned reward model (versioned JSON)
    models/<user>__<domain>.loss.csv  its training curve
    agents/<user>__<domain>.json      trained agent (kind-tagged JSON)
    questionnaires/<user>.json        per-period questionnaire scores
    jobs/<job>.json                   training-job records

Artifacts are written atomically (temp file + rename); the answer log is
append-only so a crash between requests loses at most nothing that was acked.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterator, Mapping

SAFE_ID_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


def check_safe_id(value: str, what: str = "id") -> str:
    if not value or len(value) > 64 or any(c not in SAFE_ID_CHARS for c in value):
        raise ValueError(f"{what} must be 1-64 chars of [A-Za-z0-9_-]")
    return value


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: Path, obj: Any) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def append_jsonl(path: Path, obj: Mapping[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(obj) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def read_jsonl(path: Path) -> list[dict[str, Any]]:
    if not path.exists():
        return []
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


class DataStore:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths -----------------------------------------------------------

    @property
    def corpus_path(self) -> Path:
        return self.root / "corpus.jsonl"

    def user_path(self, user_id: str) -> Path:
        return self.root / "users" / f"{user_id}.json"

    def session_meta_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.meta.json"

    def session_log_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.log.jsonl"

    def model_path(self, user_id: str, domain: str) -> Path:
        return self.root / "models" / f"{user_id}__{domain}.json"

    def loss_curve_path(self, user_id: str, domain: str) -> Path:
        return self.root / "models" / f"{user_id}__{domain}.loss.csv"

    def agent_path(self, user_id: str, domain: str) -> Path:
        return self.root / "agents" / f"{user_id}__{domain}.json"

    def questionnaire_path(self, user_id: str) -> Path:
        return self.root / "questionnaires" / f"{user_id}.json"

    def job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    # -- enumeration -------------------------------------------------------

    def iter_users(self) -> Iterator[dict[str, Any]]:
        users_dir = self.root / "users"
        if users_dir.is_dir():
            for path in sorted(users_dir.glob("*.json")):
                yield read_json(path)

    def iter_session_metas(self) -> Iterator[dict[str, Any]]:
        sessions_dir = self.root / "sessions"
        if sessions_dir.is_dir():
            for path in sorted(sessions_dir.glob("*.meta.json")):
                yield read_json(path)

    def iter_jobs(self) -> Iterator[dict[str, Any]]:
        jobs_dir = self.root / "jobs"
        if jobs_dir.is_dir():
            for path in sorted(jobs_dir.glob("*.json")):
                yield read_json(path)
