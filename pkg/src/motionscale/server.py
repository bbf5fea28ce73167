"""HTTP annotation service: serves video pairs to the web UI and persists labels.

Annotations land in an append-only JSONL log (flushed and fsynced before the
success response); the in-memory index is last-write-wins per pair and is
rebuilt from the log on restart.
"""

from __future__ import annotations

import io
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .trainer import PairAnnotation
from .video_core import VideoClip, load_clip


@dataclass(frozen=True)
class ManifestEntry:
    pair_id: str
    clip_a_path: Path
    clip_b_path: Path


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read a dataset manifest (JSONL); clip paths resolve relative to it."""
    path = Path(path)
    root = path.parent
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            entries.append(ManifestEntry(
                pair_id=str(rec["pair_id"]),
                clip_a_path=root / rec["clip_a_path"],
                clip_b_path=root / rec["clip_b_path"],
            ))
    if not entries:
        raise ValueError(f"empty manifest: {path}")
    return entries


class AnnotationStore:
    """Append-only JSONL log with a last-write-wins index and unlabeled queue."""

    def __init__(self, log_path: str | Path, pair_ids: list[str]):
        self._log_path = Path(log_path)
        self._lock = threading.Lock()
        self._pair_ids = list(pair_ids)
        self._index: dict[str, PairAnnotation] = {}
        if self._log_path.exists():
            with open(self._log_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    ann = PairAnnotation.from_json_dict(json.loads(line))
                    self._index[ann.pair_id] = ann
        self._fh = open(self._log_path, "a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    def known(self, pair_id: str) -> bool:
        return pair_id in self._pair_ids

    def append(self, ann: PairAnnotation) -> None:
        """Durably record one annotation: the log line is flushed and fsynced
        before this returns."""
        if not self.known(ann.pair_id):
            raise KeyError(f"unknown pair_id {ann.pair_id!r}")
        line = json.dumps(ann.to_json_dict(), sort_keys=True) + "\n"
        with self._lock:
            self._fh.write(line)
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._index[ann.pair_id] = ann

    def next_unlabeled(self) -> str | None:
        with self._lock:
            for pid in self._pair_ids:
                if pid not in self._index:
                    return pid
        return None

    def progress(self) -> tuple[int, int]:
        with self._lock:
            return len(self._index), len(self._pair_ids)

    def export(self) -> list[PairAnnotation]:
        """One record per annotated pair (the latest), ordered by pair_id."""
        with self._lock:
            return [self._index[pid] for pid in sorted(self._index)]


@dataclass(frozen=True)
class SessionConfig:
    manifest_path: Path
    host: str = "127.0.0.1"
    port: int = 8765
    static_dir: Path | None = None


class _ClipCache:
    """Small decoded-clip cache for the frame endpoints."""

    def __init__(self, entries: list[ManifestEntry], capacity: int = 8):
        self._by_id: dict[str, Path] = {}
        for e in entries:
            self._by_id[f"{e.pair_id}.a"] = e.clip_a_path
            self._by_id[f"{e.pair_id}.b"] = e.clip_b_path
        self._cache: dict[str, VideoClip] = {}
        self._order: list[str] = []
        self._capacity = capacity
        self._lock = threading.Lock()

    def get(self, clip_id: str) -> VideoClip | None:
        with self._lock:
            if clip_id in self._cache:
                return self._cache[clip_id]
            path = self._by_id.get(clip_id)
            if path is None:
                return None
            clip = load_clip(path)
            self._cache[clip_id] = clip
            self._order.append(clip_id)
            if len(self._order) > self._capacity:
                self._cache.pop(self._order.pop(0), None)
            return clip


def _frame_png(clip: VideoClip, index: int) -> bytes:
    from PIL import Image

    frame = clip.data[index]
    if frame.shape[-1] == 1:
        img = Image.fromarray(frame[..., 0], mode="L")
    else:
        img = Image.fromarray(frame, mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


_FRAME_RE = re.compile(r"^/api/clip/([^/]+)/frame/(\d+)$")
_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}


class AnnotationService:
    """Wires the store, manifest, and static UI bundle into an HTTP server."""

    def __init__(self, cfg: SessionConfig, store: AnnotationStore):
        self.cfg = cfg
        self.store = store
        self.entries = load_manifest(cfg.manifest_path)
        self.by_pair = {e.pair_id: e for e in self.entries}
        self.clips = _ClipCache(self.entries)
        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet by default
                pass

            def _send(self, code: int, body: bytes, content_type: str) -> None:
                self.send_response(code)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def _send_json(self, code: int, payload: dict) -> None:
                self._send(code, json.dumps(payload).encode(), "application/json")

            def do_GET(self) -> None:
                service.handle_get(self)

            def do_POST(self) -> None:
                service.handle_post(self)

        self.handler_class = Handler
        self.httpd: ThreadingHTTPServer | None = None

    # -- request handling -------------------------------------------------

    def handle_get(self, req) -> None:
        path = req.path.split("?", 1)[0]
        if path == "/api/pairs/next":
            pid = self.store.next_unlabeled()
            if pid is None:
                req.send_response(204)
                req.send_header("Content-Length", "0")
                req.end_headers()
                return
            clip = self.clips.get(f"{pid}.a")
            req._send_json(200, {
                "pair_id": pid,
                "clip_a": f"{pid}.a",
                "clip_b": f"{pid}.b",
                "fps": clip.fps,
                "frames": clip.frames,
            })
            return
        if path == "/api/progress":
            labeled, total = self.store.progress()
            req._send_json(200, {"labeled": labeled, "total": total})
            return
        m = _FRAME_RE.match(path)
        if m:
            clip = self.clips.get(m.group(1))
            if clip is None:
                req._send_json(404, {"error": f"unknown clip {m.group(1)!r}"})
                return
            idx = int(m.group(2))
            if idx >= clip.frames:
                req._send_json(404, {"error": f"frame {idx} out of range"})
                return
            req._send(200, _frame_png(clip, idx), "image/png")
            return
        self._serve_static(req, path)

    def _serve_static(self, req, path: str) -> None:
        if self.cfg.static_dir is None:
            req._send_json(404, {"error": "no static bundle configured"})
            return
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.cfg.static_dir / rel).resolve()
        root = self.cfg.static_dir.resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            req._send_json(404, {"error": "not found"})
            return
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        req._send(200, target.read_bytes(), ctype)

    def handle_post(self, req) -> None:
        if req.path.split("?", 1)[0] != "/api/annotations":
            req._send_json(404, {"error": "not found"})
            return
        try:
            length = int(req.headers.get("Content-Length", "0"))
            payload = json.loads(req.rfile.read(length).decode("utf-8"))
            payload["timestamp"] = time.time()  # server stamps receipt time
            ann = PairAnnotation.from_json_dict(payload)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            req._send_json(400, {"error": str(exc)})
            return
        if not self.store.known(ann.pair_id):
            req._send_json(404, {"error": f"unknown pair_id {ann.pair_id!r}"})
            return
        self.store.append(ann)
        req._send_json(200, {"ok": True})

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> ThreadingHTTPServer:
        self.httpd = ThreadingHTTPServer((self.cfg.host, self.cfg.port), self.handler_class)
        return self.httpd

    def serve_forever(self) -> None:
        self.start().serve_forever()


def serve(cfg: SessionConfig, store: AnnotationStore) -> AnnotationService:
    """Build the service; call ``serve_forever`` (or ``start`` for tests)."""
    return AnnotationService(cfg, store)
