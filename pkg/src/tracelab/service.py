"""HTTP capture service: assigns timed tracing tasks and persists submissions.

The coordinator is the single authority over collection state.  Every
(image, time limit, set label) cell needs a target number of accepted
sketches; assignment always picks a least-covered eligible cell, counting
in-flight tasks so concurrent drawers spread out.  Submissions are validated
server-side (browsers cannot be trusted with deadlines) and appended to an
append-only JSONL store, fsynced before the client sees an acknowledgment,
so the store is always a prefix of valid records and coverage can be rebuilt
from it after a crash.
"""

from __future__ import annotations

import json
import mimetypes
import os
import threading
import time
import uuid
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .dataio import (
    ImageManifest,
    LABEL_BASELINE_20S,
    LABEL_PRIMARY,
    SketchRecord,
    parse_record,
    serialize_record,
    validate_submission,
    env_grace_ms,
    env_min_length_px,
)

#: Collection conditions in assignment tie-break order.
DEFAULT_CONDITIONS: tuple[tuple[int, str], ...] = (
    (10, LABEL_PRIMARY),
    (20, LABEL_PRIMARY),
    (20, LABEL_BASELINE_20S),
    (40, LABEL_PRIMARY),
)

DEFAULT_TARGET = 10
DEFAULT_TASK_TTL_S = 600.0

Cell = tuple[str, int, str]


class CollectionComplete(Exception):
    """Every cell has reached its target."""


class NoEligibleTask(Exception):
    """This drawer has already been assigned every cell still open."""


class UnknownTask(KeyError):
    pass


class ExpiredTask(Exception):
    pass


class DuplicateSubmission(Exception):
    pass


@dataclass(frozen=True)
class TaskAssignment:
    task_id: str
    drawer_id: str
    image_id: str
    time_limit_s: int
    set_label: str
    issued_at: float
    expires_at: float

    def to_json(self, entry) -> dict:
        return {
            "task_id": self.task_id,
            "drawer_id": self.drawer_id,
            "image_id": self.image_id,
            "time_limit_s": self.time_limit_s,
            "set_label": self.set_label,
            "issued_at": self.issued_at,
            "expires_at": self.expires_at,
            "image_url": f"/images/{self.image_id}",
            "image_w": entry.width,
            "image_h": entry.height,
        }


class SketchStore:
    """Append-only JSONL persistence with per-record durability.

    Each accepted record is written with a single ``write`` call on an
    O_APPEND descriptor and fsynced before the append returns, so a crash
    leaves at most one torn trailing line, which :meth:`load` skips.
    """

    def __init__(self, path: str) -> None:
        self.path = path
        self._fd = os.open(path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)

    def append(self, record: SketchRecord) -> None:
        data = (serialize_record(record) + "\n").encode("utf-8")
        os.write(self._fd, data)
        os.fsync(self._fd)

    def close(self) -> None:
        os.close(self._fd)

    @staticmethod
    def load(path: str) -> list[SketchRecord]:
        """Read all complete records; a torn final line is ignored."""
        records: list[SketchRecord] = []
        if not os.path.exists(path):
            return records
        with open(path, "rb") as fh:
            raw = fh.read()
        lines = raw.split(b"\n")
        trailing = lines.pop()  # b"" when the file ends with a newline
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            records.append(parse_record(line.decode("utf-8")))
        if trailing.strip():
            # torn write from an interrupted process; the prefix stays valid
            pass
        return records


class Coordinator:
    """Serialized collection state: coverage, in-flight tasks, drawer history."""

    def __init__(self, manifest: ImageManifest, store: SketchStore,
                 target: int = DEFAULT_TARGET,
                 min_length_px: float | None = None,
                 grace_ms: int | None = None,
                 task_ttl_s: float = DEFAULT_TASK_TTL_S,
                 conditions: tuple[tuple[int, str], ...] = DEFAULT_CONDITIONS,
                 clock=time.time) -> None:
        self.manifest = manifest
        self.store = store
        self.target = target
        self.min_length_px = env_min_length_px() if min_length_px is None else min_length_px
        self.grace_ms = env_grace_ms() if grace_ms is None else grace_ms
        self.task_ttl_s = task_ttl_s
        self.conditions = conditions
        self.clock = clock
        self._lock = threading.Lock()

        self._cells: list[Cell] = [
            (image_id, limit, label)
            for image_id in manifest.image_ids()
            for (limit, label) in conditions
        ]
        self._cell_rank = {cell: (cell[0], conditions.index((cell[1], cell[2])))
                           for cell in self._cells}
        self._accepted: dict[Cell, int] = {cell: 0 for cell in self._cells}
        self._inflight: dict[str, tuple[Cell, str, float]] = {}
        self._resolved: dict[str, str] = {}  # task_id -> accepted | rejected | expired
        self._pending: dict[str, TaskAssignment] = {}
        self._drawer_cells: dict[str, set[Cell]] = {}
        self._replay_store()

    def _replay_store(self) -> None:
        for record in SketchStore.load(self.store.path):
            sk = record.sketch
            cell = (sk.image_id, int(sk.time_limit_s), record.set_label)
            if cell in self._accepted:
                self._accepted[cell] += 1
                self._drawer_cells.setdefault(sk.drawer_id, set()).add(cell)

    # -- assignment ---------------------------------------------------------

    def assign_task(self, drawer_id: str) -> TaskAssignment:
        if not drawer_id:
            raise ValueError("drawer_id is required")
        with self._lock:
            now = self.clock()
            self._purge_expired(now)
            open_cells = [c for c in self._cells if self._coverage(c) < self.target]
            if not open_cells:
                raise CollectionComplete("collection complete")
            done = self._drawer_cells.get(drawer_id, set())
            eligible = [c for c in open_cells if c not in done]
            if not eligible:
                raise NoEligibleTask("no eligible task for this drawer")
            cell = min(eligible, key=lambda c: (self._coverage(c), self._cell_rank[c]))
            task = TaskAssignment(
                task_id=uuid.uuid4().hex,
                drawer_id=drawer_id,
                image_id=cell[0],
                time_limit_s=cell[1],
                set_label=cell[2],
                issued_at=now,
                expires_at=now + self.task_ttl_s,
            )
            self._inflight[task.task_id] = (cell, drawer_id, task.expires_at)
            self._pending[task.task_id] = task
            self._drawer_cells.setdefault(drawer_id, set()).add(cell)
            return task

    def _coverage(self, cell: Cell) -> int:
        pending = sum(1 for c, _, _ in self._inflight.values() if c == cell)
        return self._accepted[cell] + pending

    def _purge_expired(self, now: float) -> None:
        for task_id in [tid for tid, (_, _, exp) in self._inflight.items()
                        if exp <= now]:
            del self._inflight[task_id]
            del self._pending[task_id]
            self._resolved[task_id] = "expired"

    # -- submission ---------------------------------------------------------

    def submit_sketch(self, task_id: str, record: SketchRecord) -> tuple[str, str | None]:
        """Validate and persist one submission; returns (status, reason)."""
        with self._lock:
            now = self.clock()
            self._purge_expired(now)
            if task_id in self._resolved:
                if self._resolved[task_id] == "expired":
                    raise ExpiredTask(task_id)
                raise DuplicateSubmission(task_id)
            if task_id not in self._inflight:
                raise UnknownTask(task_id)
            cell, drawer_id, _ = self._inflight.pop(task_id)
            task = self._pending.pop(task_id)

            def reject(reason: str) -> tuple[str, str | None]:
                self._resolved[task_id] = "rejected"
                return ("rejected", reason)

            sk = record.sketch
            if (sk.image_id != task.image_id
                    or sk.time_limit_s != task.time_limit_s
                    or sk.drawer_id != drawer_id):
                return reject("task mismatch")
            if self._accepted[cell] >= self.target:
                return reject("cell full")
            record = SketchRecord(sk, record.client_version, task.set_label)
            verdict = validate_submission(record, self.manifest[sk.image_id],
                                          self.min_length_px, self.grace_ms)
            if not verdict:
                return reject(verdict.reason or "invalid")
            self.store.append(record)  # durable before the client hears "accepted"
            self._accepted[cell] += 1
            self._resolved[task_id] = "accepted"
            return ("accepted", None)

    # -- reporting ----------------------------------------------------------

    def stats(self) -> dict:
        with self._lock:
            self._purge_expired(self.clock())
            cells = [
                {
                    "image_id": c[0],
                    "time_limit_s": c[1],
                    "set_label": c[2],
                    "accepted": self._accepted[c],
                    "in_flight": sum(1 for cc, _, _ in self._inflight.values() if cc == c),
                    "target": self.target,
                }
                for c in self._cells
            ]
            accepted = sum(self._accepted.values())
            return {
                "cells": cells,
                "accepted_total": accepted,
                "target_total": self.target * len(self._cells),
                "complete": all(self._accepted[c] >= self.target for c in self._cells),
            }


class _Handler(BaseHTTPRequestHandler):
    coordinator: Coordinator  # set by make_server
    image_dir: str | None = None
    static_dir: str | None = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # tests run quiet
        pass

    # -- helpers ------------------------------------------------------------

    def _send_json(self, status: int, obj: dict, no_store: bool = False) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        if no_store:
            self.send_header("Cache-Control", "no-store")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        return self.rfile.read(length)

    # -- routes -------------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        if url.path == "/api/task":
            self._handle_task(parse_qs(url.query))
        elif url.path == "/api/stats":
            self._send_json(200, self.coordinator.stats())
        elif url.path.startswith("/images/"):
            self._handle_image(url.path[len("/images/"):], head=False)
        elif self.static_dir:
            self._handle_static(url.path)
        else:
            self._send_json(404, {"error": "not found"})

    def do_HEAD(self) -> None:
        url = urlparse(self.path)
        if url.path.startswith("/images/"):
            self._handle_image(url.path[len("/images/"):], head=True)
        else:
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()

    def do_POST(self) -> None:
        url = urlparse(self.path)
        if url.path.startswith("/api/submission/"):
            self._handle_submission(url.path[len("/api/submission/"):])
        else:
            self._send_json(404, {"error": "not found"})

    def _handle_task(self, query: dict) -> None:
        drawer_id = (query.get("drawer_id") or [""])[0]
        if not drawer_id:
            self._send_json(400, {"error": "drawer_id is required"}, no_store=True)
            return
        try:
            task = self.coordinator.assign_task(drawer_id)
        except CollectionComplete:
            self._send_json(409, {"error": "collection complete"}, no_store=True)
            return
        except NoEligibleTask:
            self._send_json(409, {"error": "no eligible task"}, no_store=True)
            return
        entry = self.coordinator.manifest[task.image_id]
        self._send_json(200, task.to_json(entry), no_store=True)

    def _handle_submission(self, task_id: str) -> None:
        try:
            record = parse_record(self._read_body().decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as e:
            self._send_json(400, {"error": f"bad record: {e}"})
            return
        try:
            status, reason = self.coordinator.submit_sketch(task_id, record)
        except UnknownTask:
            self._send_json(404, {"error": "unknown task"})
            return
        except ExpiredTask:
            self._send_json(410, {"error": "task expired"})
            return
        except DuplicateSubmission:
            self._send_json(409, {"error": "duplicate submission"})
            return
        body = {"status": status}
        if reason:
            body["reason"] = reason
        self._send_json(200, body)

    def _handle_image(self, image_id: str, head: bool) -> None:
        manifest = self.coordinator.manifest
        if image_id not in manifest:
            self._send_json(404, {"error": f"unknown image '{image_id}'"})
            return
        path = manifest[image_id].path
        if self.image_dir:
            path = os.path.join(self.image_dir, os.path.basename(path))
        if not path or not os.path.exists(path):
            self._send_json(404, {"error": f"missing image file for '{image_id}'"})
            return
        ctype = mimetypes.guess_type(path)[0] or "application/octet-stream"
        with open(path, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Cache-Control", "private, max-age=300")
        self.end_headers()
        if not head:
            self.wfile.write(data)

    def _handle_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        full = os.path.normpath(os.path.join(self.static_dir, rel))
        if not full.startswith(os.path.abspath(self.static_dir)) \
                or not os.path.isfile(full):
            self._send_json(404, {"error": "not found"})
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(host: str, port: int, coordinator: Coordinator,
                image_dir: str | None = None,
                static_dir: str | None = None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {
        "coordinator": coordinator,
        "image_dir": image_dir,
        "static_dir": os.path.abspath(static_dir) if static_dir else None,
    })
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server
