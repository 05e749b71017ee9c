"""Gesture annotation events and their expansion into per-frame labels.

Annotation documents are UTF-8 JSON, one per video::

    {"video_id": "c01_session1", "fps": 30,
     "events": [{"gesture": "tongue_out", "start_frame": 10, "end_frame": 20,
                 "start_time_s": 0.333..., "end_time_s": 0.666...}]}

Event times are derived from frame indices at the declared fps; a document
whose times disagree with its frames by more than half a frame is rejected.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import AnnotationError

GESTURES = ("tongue_out", "smiling", "mouth_opening")
NEUTRAL = "neutral"
EXCLUDED = "excluded"

DEFAULT_FPS = 30.0


@dataclass
class AnnotationEvent:
    gesture: str
    start_frame: int
    end_frame: int
    start_time_s: float
    end_time_s: float

    @classmethod
    def from_frames(cls, gesture: str, start_frame: int, end_frame: int,
                    fps: float = DEFAULT_FPS) -> "AnnotationEvent":
        return cls(gesture, start_frame, end_frame,
                   start_frame / fps, end_frame / fps)

    def validate(self, fps: float, frame_count: int | None = None) -> None:
        if self.gesture not in GESTURES:
            raise AnnotationError(f"unknown gesture {self.gesture!r}")
        if self.start_frame < 0:
            raise AnnotationError(f"start_frame {self.start_frame} is negative")
        if self.start_frame > self.end_frame:
            raise AnnotationError(
                f"start_frame {self.start_frame} > end_frame {self.end_frame}"
            )
        if frame_count is not None and self.end_frame >= frame_count:
            raise AnnotationError(
                f"end_frame {self.end_frame} outside 0..{frame_count - 1}"
            )
        half_frame = 0.5 / fps
        if abs(self.start_time_s - self.start_frame / fps) > half_frame or \
           abs(self.end_time_s - self.end_frame / fps) > half_frame:
            raise AnnotationError(
                f"event times are inconsistent with frames at {fps} fps"
            )


def check_no_overlap(events: list[AnnotationEvent]) -> None:
    """Same-gesture events must not overlap (after sorting by start)."""
    by_gesture: dict[str, list[AnnotationEvent]] = {}
    for e in events:
        by_gesture.setdefault(e.gesture, []).append(e)
    for gesture, evs in by_gesture.items():
        evs = sorted(evs, key=lambda e: e.start_frame)
        for a, b in zip(evs, evs[1:]):
            if b.start_frame <= a.end_frame:
                raise AnnotationError(
                    f"overlapping {gesture} events: "
                    f"[{a.start_frame}, {a.end_frame}] and "
                    f"[{b.start_frame}, {b.end_frame}]"
                )


def ingest_annotations(events: list[AnnotationEvent], frame_count: int,
                       guard: int = 0, fps: float = DEFAULT_FPS) -> list[str]:
    """Expand events into one label per frame.

    Frames inside an event take its gesture; frames that would otherwise be
    neutral but lie within ``guard`` frames outside any event boundary are
    marked excluded; everything else is neutral.
    """
    if frame_count <= 0:
        raise AnnotationError(f"frame_count must be positive, got {frame_count}")
    for e in events:
        e.validate(fps, frame_count)
    check_no_overlap(events)

    labels = [NEUTRAL] * frame_count
    for e in events:
        for f in range(e.start_frame, e.end_frame + 1):
            labels[f] = e.gesture
    if guard > 0:
        for e in events:
            before = range(max(0, e.start_frame - guard), e.start_frame)
            after = range(e.end_frame + 1, min(frame_count, e.end_frame + guard + 1))
            for f in list(before) + list(after):
                if labels[f] == NEUTRAL:
                    labels[f] = EXCLUDED
    return labels


# --- document (de)serialization -------------------------------------------------

def document_from_events(video_id: str, events: list[AnnotationEvent],
                         fps: float = DEFAULT_FPS) -> dict:
    return {"video_id": video_id, "fps": fps,
            "events": [asdict(e) for e in events]}


def events_from_document(doc: dict) -> tuple[str, float, list[AnnotationEvent]]:
    try:
        video_id = doc["video_id"]
        fps = float(doc.get("fps", DEFAULT_FPS))
        events = [
            AnnotationEvent(
                gesture=e["gesture"],
                start_frame=int(e["start_frame"]),
                end_frame=int(e["end_frame"]),
                start_time_s=float(e["start_time_s"]),
                end_time_s=float(e["end_time_s"]),
            )
            for e in doc.get("events", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise AnnotationError(f"malformed annotation document: {exc}") from exc
    return video_id, fps, events


def dump_document(doc: dict) -> bytes:
    """Canonical byte encoding used for storage and HTTP responses."""
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def load_annotation_file(path: str | Path) -> tuple[str, float, list[AnnotationEvent]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return events_from_document(doc)
