"""HTTP backend for the annotation workflow.

Serves pre-extracted frame sequences and persists gesture events:

- ``GET  /api/videos``                      list {video_id, frame_count, fps}
- ``GET  /api/videos/{id}/frames/{n}``      one frame as BMP bytes (cacheable)
- ``GET  /api/videos/{id}/events``          the stored annotation document
- ``PUT  /api/videos/{id}/events``          replace it (validated, atomic)
- ``GET  /``                                static UI assets when configured

Layout on disk: every direct subdirectory of ``video_root`` holding .ppm or
.bmp files is a video; frame order is the sorted file order. An optional
``meta.json`` ({"fps": 30}) overrides the default frame rate. Annotation
documents live in ``annotation_root/{video_id}.json`` and are written via a
temp file plus atomic rename under a per-video lock, so readers never see a
torn file. Event times are recomputed server-side from frame indices, which
keeps frame/time consistency authoritative in one place.
"""

from __future__ import annotations

import logging
import os
import tempfile
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, field_validator

from .data.annotations import (
    DEFAULT_FPS,
    GESTURES,
    AnnotationEvent,
    check_no_overlap,
    document_from_events,
    dump_document,
)
from .errors import AnnotationError
from .vision.image import decode_image, encode_bmp

log = logging.getLogger(__name__)

FRAME_SUFFIXES = (".ppm", ".bmp")

PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>gesture-forge annotation service</title></head>
<body><h1>gesture-forge annotation service</h1>
<p>No UI bundle is configured. Point --ui-root at the built frontend, or use
the JSON API under <code>/api/videos</code>.</p></body></html>
"""


class EventPayload(BaseModel):
    gesture: str
    start_frame: int = Field(ge=0)
    end_frame: int = Field(ge=0)
    # Client-supplied times are accepted but recomputed server-side.
    start_time_s: float | None = None
    end_time_s: float | None = None

    @field_validator("gesture")
    @classmethod
    def gesture_known(cls, v: str) -> str:
        if v not in GESTURES:
            raise ValueError(f"gesture must be one of {GESTURES}")
        return v


class EventsDocument(BaseModel):
    video_id: str | None = None
    fps: float | None = None
    events: list[EventPayload]


class VideoStore:
    """Frame directories plus per-video annotation documents."""

    def __init__(self, video_root: Path, annotation_root: Path,
                 default_fps: float = DEFAULT_FPS):
        self.video_root = Path(video_root)
        self.annotation_root = Path(annotation_root)
        self.default_fps = default_fps
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, video_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(video_id, threading.Lock())

    def list_videos(self) -> list[dict]:
        out = []
        for entry in sorted(self.video_root.iterdir()):
            if not entry.is_dir():
                continue
            frames = self.frame_files(entry.name)
            if frames:
                out.append({
                    "video_id": entry.name,
                    "frame_count": len(frames),
                    "fps": self.fps(entry.name),
                })
        return out

    def frame_files(self, video_id: str) -> list[Path]:
        d = self.video_root / video_id
        if not d.is_dir():
            return []
        return sorted(p for p in d.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)

    def fps(self, video_id: str) -> float:
        meta = self.video_root / video_id / "meta.json"
        if meta.exists():
            import json

            try:
                return float(json.loads(meta.read_text()).get("fps", self.default_fps))
            except (ValueError, OSError):
                log.warning("unreadable meta.json for %s; using default fps", video_id)
        return self.default_fps

    def annotation_path(self, video_id: str) -> Path:
        return self.annotation_root / f"{video_id}.json"

    def read_events_bytes(self, video_id: str) -> bytes:
        path = self.annotation_path(video_id)
        if path.exists():
            return path.read_bytes()
        return dump_document(
            document_from_events(video_id, [], self.fps(video_id))
        )

    def write_events(self, video_id: str, events: list[AnnotationEvent]) -> bytes:
        doc = document_from_events(video_id, events, self.fps(video_id))
        payload = dump_document(doc)
        path = self.annotation_path(video_id)
        with self._lock(video_id):
            self.annotation_root.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(dir=self.annotation_root,
                                            prefix=f".{video_id}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(payload)
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
        return payload


def create_app(video_root: str | Path, annotation_root: str | Path,
               ui_root: str | Path | None = None,
               default_fps: float = DEFAULT_FPS) -> FastAPI:
    store = VideoStore(Path(video_root), Path(annotation_root), default_fps)
    app = FastAPI(title="gesture-forge annotation service")
    app.state.store = store

    def get_video_or_404(video_id: str) -> list[Path]:
        frames = store.frame_files(video_id)
        if not frames:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id!r}")
        return frames

    @app.get("/api/videos")
    def list_videos():
        return store.list_videos()

    @app.get("/api/videos/{video_id}/frames/{index}")
    def get_frame(video_id: str, index: int):
        frames = get_video_or_404(video_id)
        if not 0 <= index < len(frames):
            raise HTTPException(
                status_code=404,
                detail=f"frame {index} outside 0..{len(frames) - 1}",
            )
        path = frames[index]
        data = path.read_bytes()
        if path.suffix.lower() != ".bmp":
            data = encode_bmp(decode_image(data))
        return Response(
            content=data,
            media_type="image/bmp",
            headers={"Cache-Control": "public, max-age=86400, immutable"},
        )

    @app.get("/api/videos/{video_id}/events")
    def get_events(video_id: str):
        get_video_or_404(video_id)
        return Response(content=store.read_events_bytes(video_id),
                        media_type="application/json")

    @app.put("/api/videos/{video_id}/events")
    def put_events(video_id: str, doc: EventsDocument):
        frames = get_video_or_404(video_id)
        fps = store.fps(video_id)
        events = [
            AnnotationEvent.from_frames(e.gesture, e.start_frame, e.end_frame, fps)
            for e in doc.events
        ]
        problems = []
        for i, event in enumerate(events):
            try:
                event.validate(fps, frame_count=len(frames))
            except AnnotationError as exc:
                problems.append({"loc": ["body", "events", i], "msg": str(exc),
                                 "type": "value_error"})
        if not problems:
            try:
                check_no_overlap(events)
            except AnnotationError as exc:
                problems.append({"loc": ["body", "events"], "msg": str(exc),
                                 "type": "value_error"})
        if problems:
            return JSONResponse(status_code=422, content={"detail": problems})
        payload = store.write_events(video_id, events)
        return Response(content=payload, media_type="application/json")

    if ui_root is not None and Path(ui_root).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_root), html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def placeholder():
            return PLACEHOLDER_PAGE

    return app
