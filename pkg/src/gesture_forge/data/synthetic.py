"""Synthetic participant generator for end-to-end pipeline runs.

Real recordings of children cannot ship with the code, so this module renders
small face-like 32x32 frames with per-participant appearance biases:

- children get a participant-specific background hue, skin tone, and face
  offset; tongue-out frames add a bright red blob protruding below the mouth;
- adults mimic a tighter nose-to-chin grayscale crop with a dark protruding
  blob instead, giving the adult cohort a deliberate domain gap from the
  children.

Smiling (wide upturned mouth) and mouth-opening (dark oral cavity) frames are
rendered for children so the misc-class evaluation has material to work with.
Everything is seeded and byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..vision.image import ImageBuffer, encode_ppm
from .manifest import write_manifest

SIZE = 32


@dataclass
class ParticipantStyle:
    background: np.ndarray  # (3,) uint8
    skin: np.ndarray        # (3,) uint8
    offset: tuple[int, int]  # face center shift (dx, dy)
    grayscale: bool


def _child_style(rng: np.random.Generator) -> ParticipantStyle:
    # Correlated channel jitter: per-participant tint without letting the
    # background become more discriminative than the gesture itself.
    base = rng.integers(115, 165)
    background = np.clip(base + rng.integers(-15, 16, size=3), 0, 255).astype(np.uint8)
    # Correlated skin channels: redness stays far below the tongue blob's.
    skin_r = rng.integers(190, 226)
    skin_g = skin_r - rng.integers(35, 56)
    skin_b = skin_g - rng.integers(25, 46)
    skin = np.array([skin_r, skin_g, skin_b], dtype=np.uint8)
    offset = (int(rng.integers(-3, 4)), int(rng.integers(-2, 3)))
    return ParticipantStyle(background, skin, offset, grayscale=False)


def _adult_style(rng: np.random.Generator) -> ParticipantStyle:
    bg = np.uint8(rng.integers(30, 70))
    skin = np.uint8(rng.integers(140, 200))
    offset = (int(rng.integers(-2, 3)), int(rng.integers(-1, 2)))
    return ParticipantStyle(
        np.array([bg, bg, bg], dtype=np.uint8),
        np.array([skin, skin, skin], dtype=np.uint8),
        offset,
        grayscale=True,
    )


def _ellipse_mask(cx: float, cy: float, rx: float, ry: float) -> np.ndarray:
    ys, xs = np.mgrid[0:SIZE, 0:SIZE]
    return ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0


def render_frame(style: ParticipantStyle, label: str, rng: np.random.Generator) -> ImageBuffer:
    img = np.empty((SIZE, SIZE, 3), dtype=np.float64)
    img[:] = style.background

    # Per-frame head wobble on top of the participant's fixed offset.
    cx = SIZE / 2 + style.offset[0] + int(rng.integers(-1, 2))
    cy = SIZE / 2 + style.offset[1] + int(rng.integers(-1, 2))

    if style.grayscale:
        # Nose-to-chin crop: the face region fills most of the frame.
        face = _ellipse_mask(cx, cy, 14, 15)
        img[face] = style.skin
        mouth_y = cy + 2
    else:
        face = _ellipse_mask(cx, cy, 11, 13)
        img[face] = style.skin
        eye_y = int(cy - 4)
        for ex in (int(cx - 4), int(cx + 4)):
            img[eye_y : eye_y + 2, ex : ex + 2] = (40, 30, 30)
        mouth_y = cy + 5

    my = int(mouth_y)
    mouth_dark = (90, 40, 40) if not style.grayscale else (60, 60, 60)

    if label == "neutral":
        img[my : my + 1, int(cx - 4) : int(cx + 4)] = mouth_dark
    elif label == "tongue_out":
        img[my : my + 1, int(cx - 4) : int(cx + 4)] = mouth_dark
        blob = _ellipse_mask(cx, my + 4, 3.5, 4.5) & (np.mgrid[0:SIZE, 0:SIZE][0] > my)
        if style.grayscale:
            img[blob] = (235, 235, 235)  # bright protrusion: the adult cohort's cue
        else:
            img[blob] = (235, 40, 60)  # saturated red protrusion: the child cue
    elif label == "smiling":
        img[my : my + 1, int(cx - 6) : int(cx + 6)] = mouth_dark
        img[my - 1 : my, int(cx - 7) : int(cx - 5)] = mouth_dark
        img[my - 1 : my, int(cx + 5) : int(cx + 7)] = mouth_dark
    elif label == "mouth_opening":
        cavity = _ellipse_mask(cx, my + 1, 4.0, 3.0)
        img[cavity] = (35, 20, 20) if not style.grayscale else (20, 20, 20)
    else:
        raise ValueError(f"unknown label {label!r}")

    img += rng.normal(0.0, 6.0, size=img.shape)
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return ImageBuffer(SIZE, SIZE, pixels)


DEFAULT_CHILD_COUNTS = {"neutral": 80, "tongue_out": 20, "smiling": 12, "mouth_opening": 12}
DEFAULT_ADULT_COUNTS = {"neutral": 30, "tongue_out": 25}


def generate_dataset(
    out_dir: str | Path,
    seed: int = 0,
    children: int = 5,
    adults: int = 17,
    child_counts: dict[str, int] | None = None,
    adult_counts: dict[str, int] | None = None,
) -> tuple[Path, Path]:
    """Render both cohorts and write ``manifest_children.json`` /
    ``manifest_adults.json`` under ``out_dir``. Returns the manifest paths."""
    out_dir = Path(out_dir)
    child_counts = child_counts or DEFAULT_CHILD_COUNTS
    adult_counts = adult_counts or DEFAULT_ADULT_COUNTS

    specs = [("C", i + 1, "child") for i in range(children)]
    specs += [("A", i + 1, "adult") for i in range(adults)]

    child_entries, adult_entries = [], []
    for prefix, num, cohort in specs:
        pid = f"{prefix}{num:02d}"
        rng = np.random.default_rng((seed, prefix == "A", num))
        style = _adult_style(rng) if cohort == "adult" else _child_style(rng)
        counts = adult_counts if cohort == "adult" else child_counts

        frames: dict[str, list[str]] = {}
        for label, n in counts.items():
            rels = []
            for k in range(n):
                rel = f"frames/{pid}/{label}/f{k:04d}.ppm"
                dest = out_dir / rel
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_bytes(encode_ppm(render_frame(style, label, rng)))
                rels.append(rel)
            frames[label] = rels

        entry: dict = {"id": pid, "cohort": cohort, "frames": frames}
        if cohort == "child":
            entry["gender"] = "M" if rng.integers(0, 2) else "F"
            entry["age_years"] = int(rng.integers(6, 19))
            child_entries.append(entry)
        else:
            adult_entries.append(entry)

    children_path = out_dir / "manifest_children.json"
    adults_path = out_dir / "manifest_adults.json"
    write_manifest(children_path, 30, child_entries)
    write_manifest(adults_path, 30, adult_entries)
    return adults_path, children_path
