"""Boosted Haar-cascade face detection over integral images.

The model format is the legacy OpenCV storage layout: stages hold stump
classifiers, each stump owns one Haar feature of 2-3 weighted rectangles in
base-window coordinates. Detection semantics, fixed here and mirrored by the
brute-force evaluator in the tests:

- the window slides across a scale pyramid; at scale ``s`` the window is
  ``round(base * s)`` pixels and the slide step is ``max(1, round(s))``;
- each window is variance-normalized from the integral tables; windows with
  non-positive intensity variance are rejected outright;
- a feature value is ``sum(weight_i * rect_sum_i) / window_area`` with every
  rectangle scaled by ``s`` (offsets and extents rounded, extents clamped to
  the window);
- a stump votes ``left_val`` when the feature value is below
  ``threshold * sigma`` (sigma = window standard deviation), else
  ``right_val``; a stage rejects when its vote sum falls below the stage
  threshold;
- a surviving window's score is the accumulated stage margin, the sum of
  (stage sum - stage threshold) over all stages.

Raw hits are grouped into clusters by >= 50% intersection-over-union;
clusters smaller than ``min_neighbors`` are dropped and the rest are averaged
into one box each.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from ..errors import CascadeFormatError, CascadeModelError
from .image import ImageBuffer, to_grayscale
from .integral import IntegralImage


@dataclass(frozen=True)
class FeatureRect:
    x: int
    y: int
    width: int
    height: int
    weight: float


@dataclass(frozen=True)
class WeakClassifier:
    rects: tuple[FeatureRect, ...]
    threshold: float
    left_val: float
    right_val: float


@dataclass(frozen=True)
class CascadeStage:
    threshold: float
    classifiers: tuple[WeakClassifier, ...]


@dataclass(frozen=True)
class CascadeModel:
    window_width: int
    window_height: int
    stages: tuple[CascadeStage, ...]

    @property
    def num_weak_classifiers(self) -> int:
        return sum(len(s.classifiers) for s in self.stages)


@dataclass
class BoundingBox:
    x: int
    y: int
    width: int
    height: int
    score: float = 0.0

    @property
    def area(self) -> int:
        return self.width * self.height

    def iou(self, other: "BoundingBox") -> float:
        ix = max(self.x, other.x)
        iy = max(self.y, other.y)
        ix2 = min(self.x + self.width, other.x + other.width)
        iy2 = min(self.y + self.height, other.y + other.height)
        if ix2 <= ix or iy2 <= iy:
            return 0.0
        inter = (ix2 - ix) * (iy2 - iy)
        return inter / (self.area + other.area - inter)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _text(elem: ET.Element | None, path: str) -> str:
    if elem is None or elem.text is None:
        raise CascadeFormatError("missing required element", path)
    return elem.text.strip()


def _parse_rect(elem: ET.Element, path: str, window: tuple[int, int]) -> FeatureRect:
    parts = _text(elem, path).split()
    if len(parts) != 5:
        raise CascadeFormatError(f"rect needs 'x y w h weight', got {parts!r}", path)
    try:
        x, y, w, h = (int(p) for p in parts[:4])
        weight = float(parts[4])
    except ValueError as exc:
        raise CascadeFormatError(f"malformed rect numbers: {exc}", path) from exc
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > window[0] or y + h > window[1]:
        raise CascadeFormatError(
            f"rect ({x},{y},{w},{h}) outside base window {window[0]}x{window[1]}", path
        )
    return FeatureRect(x, y, w, h, weight)


def _parse_stump(node: ET.Element, path: str, window: tuple[int, int]) -> WeakClassifier:
    if node.find("left_node") is not None or node.find("right_node") is not None:
        raise CascadeFormatError("tree classifiers are not supported, stumps only", path)
    feature = node.find("feature")
    if feature is None:
        raise CascadeFormatError("missing feature element", path)
    tilted = feature.find("tilted")
    if tilted is not None and _text(tilted, path + "/feature/tilted") not in ("0", "0."):
        raise CascadeFormatError("tilted features are not supported", path)
    rects_elem = feature.find("rects")
    if rects_elem is None:
        raise CascadeFormatError("missing rects element", path + "/feature")
    rects = tuple(
        _parse_rect(r, f"{path}/feature/rects/_[{i}]", window)
        for i, r in enumerate(rects_elem)
    )
    if not 2 <= len(rects) <= 3:
        raise CascadeFormatError(f"feature needs 2-3 rects, got {len(rects)}", path)
    try:
        threshold = float(_text(node.find("threshold"), path + "/threshold"))
        left_val = float(_text(node.find("left_val"), path + "/left_val"))
        right_val = float(_text(node.find("right_val"), path + "/right_val"))
    except ValueError as exc:
        raise CascadeFormatError(f"malformed stump scalar: {exc}", path) from exc
    return WeakClassifier(rects, threshold, left_val, right_val)


def parse_cascade_xml(text: str) -> CascadeModel:
    """Parse legacy-format cascade XML into a validated model."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise CascadeFormatError(f"malformed XML: {exc}") from exc

    cascade_elem = None
    if root.tag == "opencv_storage":
        for child in root:
            if child.get("type_id") == "opencv-haar-classifier":
                cascade_elem = child
                break
        if cascade_elem is None:
            raise CascadeFormatError(
                "no opencv-haar-classifier element found", "opencv_storage"
            )
    elif root.get("type_id") == "opencv-haar-classifier":
        cascade_elem = root
    else:
        raise CascadeFormatError(f"unexpected root element {root.tag!r}", root.tag)

    name = cascade_elem.tag
    size_parts = _text(cascade_elem.find("size"), f"{name}/size").split()
    if len(size_parts) != 2:
        raise CascadeFormatError("size must hold 'width height'", f"{name}/size")
    window = (int(size_parts[0]), int(size_parts[1]))
    if window[0] <= 0 or window[1] <= 0:
        raise CascadeFormatError(f"invalid base window {window}", f"{name}/size")

    stages_elem = cascade_elem.find("stages")
    if stages_elem is None or len(stages_elem) == 0:
        raise CascadeFormatError("cascade has no stages", f"{name}/stages")

    stages = []
    for si, stage_elem in enumerate(stages_elem):
        spath = f"{name}/stages/_[{si}]"
        trees = stage_elem.find("trees")
        if trees is None or len(trees) == 0:
            raise CascadeFormatError("stage has no trees", spath)
        classifiers = []
        for ti, tree in enumerate(trees):
            tpath = f"{spath}/trees/_[{ti}]"
            nodes = list(tree)
            if len(nodes) != 1:
                raise CascadeFormatError(
                    f"expected a single stump node, got {len(nodes)}", tpath
                )
            classifiers.append(_parse_stump(nodes[0], tpath, window))
        threshold = float(_text(stage_elem.find("stage_threshold"),
                                spath + "/stage_threshold"))
        stages.append(CascadeStage(threshold, tuple(classifiers)))

    return CascadeModel(window[0], window[1], tuple(stages))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _scaled_rect(r: FeatureRect, scale: float, win_w: int, win_h: int):
    rx = int(round(r.x * scale))
    ry = int(round(r.y * scale))
    rw = int(round(r.width * scale))
    rh = int(round(r.height * scale))
    # Rounding can push a rect one pixel past the scaled window; clamp.
    rw = min(rw, win_w - rx)
    rh = min(rh, win_h - ry)
    return rx, ry, rw, rh


def stage_sums(
    integral: IntegralImage,
    cascade: CascadeModel,
    x: int,
    y: int,
    scale: float = 1.0,
    early_exit: bool = True,
) -> tuple[list[float], bool]:
    """Per-stage vote sums for one window; stops at the first failing stage
    when ``early_exit`` is set. Returns ``([], False)`` for zero-variance
    windows."""
    win_w = int(round(cascade.window_width * scale))
    win_h = int(round(cascade.window_height * scale))
    _, variance = integral.window_variance(x, y, win_w, win_h)
    if variance <= 0:
        return [], False
    sigma = float(np.sqrt(variance))
    inv_area = 1.0 / (win_w * win_h)

    sums: list[float] = []
    passed = True
    for stage in cascade.stages:
        total = 0.0
        for clf in stage.classifiers:
            fval = 0.0
            for r in clf.rects:
                rx, ry, rw, rh = _scaled_rect(r, scale, win_w, win_h)
                fval += r.weight * integral.rect_sum(x + rx, y + ry, rw, rh)
            fval *= inv_area
            total += clf.left_val if fval < clf.threshold * sigma else clf.right_val
        sums.append(total)
        if total < stage.threshold:
            passed = False
            if early_exit:
                break
    return sums, passed


def evaluate_window(
    integral: IntegralImage, cascade: CascadeModel, x: int, y: int, scale: float = 1.0
) -> float | None:
    """Accumulated stage margin of a window, or None when rejected."""
    sums, passed = stage_sums(integral, cascade, x, y, scale)
    if not passed:
        return None
    return float(sum(s - stage.threshold for s, stage in zip(sums, cascade.stages)))


def group_hits(hits: list[BoundingBox], min_neighbors: int) -> list[BoundingBox]:
    """Cluster hits by >= 0.5 IoU (transitively) and average each cluster."""
    parent = list(range(len(hits)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(hits)):
        for j in range(i + 1, len(hits)):
            if hits[i].iou(hits[j]) >= 0.5:
                parent[find(i)] = find(j)

    clusters: dict[int, list[BoundingBox]] = {}
    for i, h in enumerate(hits):
        clusters.setdefault(find(i), []).append(h)

    merged = []
    for members in clusters.values():
        if len(members) < min_neighbors:
            continue
        merged.append(
            BoundingBox(
                x=int(round(np.mean([m.x for m in members]))),
                y=int(round(np.mean([m.y for m in members]))),
                width=int(round(np.mean([m.width for m in members]))),
                height=int(round(np.mean([m.height for m in members]))),
                score=float(np.mean([m.score for m in members])),
            )
        )
    merged.sort(key=lambda b: (-b.area, b.x, b.y))
    return merged


def detect_faces(
    img: ImageBuffer,
    cascade: CascadeModel,
    scale_step: float = 1.1,
    min_neighbors: int = 3,
    min_size: tuple[int, int] | None = None,
) -> list[BoundingBox]:
    """Multi-scale sliding-window detection; one averaged box per cluster."""
    if not cascade.stages:
        raise CascadeModelError("cascade has no stages")
    if scale_step <= 1.0:
        raise CascadeModelError(f"scale_step must exceed 1, got {scale_step}")
    min_w, min_h = min_size if min_size else (cascade.window_width, cascade.window_height)

    gray = to_grayscale(img)
    integral = IntegralImage(gray)

    hits: list[BoundingBox] = []
    scale = 1.0
    while True:
        win_w = int(round(cascade.window_width * scale))
        win_h = int(round(cascade.window_height * scale))
        if win_w > img.width or win_h > img.height:
            break
        if win_w >= min_w and win_h >= min_h:
            step = max(1, int(round(scale)))
            for y in range(0, img.height - win_h + 1, step):
                for x in range(0, img.width - win_w + 1, step):
                    score = evaluate_window(integral, cascade, x, y, scale)
                    if score is not None:
                        hits.append(BoundingBox(x, y, win_w, win_h, score))
        scale *= scale_step

    return group_hits(hits, min_neighbors)
