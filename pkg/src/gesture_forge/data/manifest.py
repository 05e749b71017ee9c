"""Dataset manifests: participants, cohorts, and per-class frame files.

Manifest files are UTF-8 JSON::

    {"fps": 30, "participants": [
        {"id": "C01", "cohort": "child", "gender": "M", "age_years": 17,
         "frames": {"neutral": ["frames/c01/n0001.ppm", ...],
                    "tongue_out": [...], "smiling": [...],
                    "mouth_opening": [...]}}]}

Frame paths are resolved relative to the manifest file's directory. Gender
and age are optional (some source datasets publish neither).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ManifestError

CLASSES = ("neutral", "tongue_out", "smiling", "mouth_opening")
PRIMARY_CLASSES = ("neutral", "tongue_out")
COHORTS = ("adult", "child")

POSITIVE_CLASS = "tongue_out"


def label_to_target(label: str) -> int:
    """Binary target: tongue-out is the positive class, everything else
    (neutral, smiling, mouth opening) is negative."""
    return 1 if label == POSITIVE_CLASS else 0


@dataclass(frozen=True)
class Sample:
    participant_id: str
    label: str
    path: Path


@dataclass
class Participant:
    id: str
    cohort: str
    frames: dict[str, list[Path]]
    gender: str | None = None
    age_years: int | None = None

    def class_count(self, label: str) -> int:
        return len(self.frames.get(label, []))

    def samples(self, classes=PRIMARY_CLASSES) -> list[Sample]:
        return [
            Sample(self.id, label, path)
            for label in classes
            for path in self.frames.get(label, [])
        ]


@dataclass
class DatasetManifest:
    fps: float
    participants: list[Participant] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {p.id: p for p in self.participants}

    def participant(self, pid: str) -> Participant:
        return self._by_id[pid]

    def participant_ids(self, cohort: str | None = None) -> list[str]:
        return [p.id for p in self.participants if cohort is None or p.cohort == cohort]

    def samples(self, participant_ids=None, classes=PRIMARY_CLASSES) -> list[Sample]:
        ids = list(participant_ids) if participant_ids is not None else self.participant_ids()
        return [s for pid in ids for s in self._by_id[pid].samples(classes)]

    def class_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CLASSES}
        for p in self.participants:
            for c in CLASSES:
                counts[c] += p.class_count(c)
        return counts


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse and validate a manifest file.

    Validation collects every problem (missing file, duplicate id, unknown
    class or cohort) before raising, so one pass reports all offenders.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError([f"{path}: unreadable manifest: {exc}"]) from exc

    problems: list[str] = []
    base = path.parent
    fps = doc.get("fps", 30)
    if not isinstance(fps, (int, float)) or fps <= 0:
        problems.append(f"fps must be a positive number, got {fps!r}")

    participants: list[Participant] = []
    seen: set[str] = set()
    for entry in doc.get("participants", []):
        pid = entry.get("id")
        if not pid:
            problems.append("participant without id")
            continue
        if pid in seen:
            problems.append(f"duplicate participant id {pid!r}")
            continue
        seen.add(pid)
        cohort = entry.get("cohort")
        if cohort not in COHORTS:
            problems.append(f"{pid}: unknown cohort {cohort!r}")
            continue
        frames: dict[str, list[Path]] = {}
        for label, rel_paths in entry.get("frames", {}).items():
            if label not in CLASSES:
                problems.append(f"{pid}: unknown class {label!r}")
                continue
            resolved = []
            for rel in rel_paths:
                p = base / rel
                if not p.exists():
                    problems.append(f"{pid}: missing file {rel}")
                else:
                    resolved.append(p)
            frames[label] = resolved
        participants.append(
            Participant(
                id=pid,
                cohort=cohort,
                frames=frames,
                gender=entry.get("gender"),
                age_years=entry.get("age_years"),
            )
        )

    if problems:
        raise ManifestError(problems)
    return DatasetManifest(fps=float(fps), participants=participants)


def write_manifest(path: str | Path, fps: float, participants: list[dict]) -> None:
    """Serialize a manifest document; paths must already be relative."""
    doc = {"fps": fps, "participants": participants}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
