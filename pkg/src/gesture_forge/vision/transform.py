"""Crop-and-resize to network resolution, plus scale/rotation augmentation.

All resampling is bilinear with half-pixel centers: output pixel ``i`` maps
to source coordinate ``x0 + (i + 0.5) * w / out - 0.5``, which makes a
same-size crop an exact pixel copy.
"""

from __future__ import annotations

import numpy as np

from ..errors import GeometryError, ShapeError
from ..nn.tensor import Tensor
from .cascade import BoundingBox
from .image import ImageBuffer

NET_SIZE = 32

SCALE_RANGE = (0.5, 1.0)
ANGLE_RANGE_DEG = (-20.0, 20.0)


def _bilinear_gather(plane_stack: np.ndarray, fx: np.ndarray, fy: np.ndarray,
                     fill: float = 0.0) -> np.ndarray:
    """Sample (C, H, W) planes at fractional (fy, fx); out-of-range taps
    contribute ``fill``."""
    c, h, w = plane_stack.shape
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    dx = (fx - x0).astype(plane_stack.dtype)
    dy = (fy - y0).astype(plane_stack.dtype)

    out = np.zeros((c,) + fx.shape, dtype=plane_stack.dtype)
    for ox, oy, wgt in (
        (x0, y0, (1 - dx) * (1 - dy)),
        (x0 + 1, y0, dx * (1 - dy)),
        (x0, y0 + 1, (1 - dx) * dy),
        (x0 + 1, y0 + 1, dx * dy),
    ):
        inside = (ox >= 0) & (ox < w) & (oy >= 0) & (oy < h)
        xs = np.clip(ox, 0, w - 1)
        ys = np.clip(oy, 0, h - 1)
        tap = plane_stack[:, ys, xs]
        if fill == 0.0:
            tap = tap * inside
        else:
            tap = np.where(inside, tap, fill)
        out += tap * wgt
    return out


def crop_resize(img: ImageBuffer, box: BoundingBox, out_size: int = NET_SIZE) -> Tensor:
    """Bilinear-resample a face box to ``out_size`` square, scaled to [0, 1].

    Returns a 1 x 3 x out x out tensor. Taps that fall outside the box but
    inside the image are used as-is; taps outside the image clamp to the edge.
    """
    if box.width <= 0 or box.height <= 0:
        raise GeometryError(f"degenerate box {box}")
    if box.x < 0 or box.y < 0 or box.x + box.width > img.width or box.y + box.height > img.height:
        raise GeometryError(
            f"box ({box.x},{box.y},{box.width},{box.height}) outside "
            f"{img.width}x{img.height} image"
        )
    planes = img.pixels.transpose(2, 0, 1).astype(np.float32)
    j = np.arange(out_size, dtype=np.float64)
    fx = box.x + (j + 0.5) * box.width / out_size - 0.5
    fy = box.y + (j + 0.5) * box.height / out_size - 0.5
    fxg, fyg = np.meshgrid(fx, fy)
    # Clamp to the image so edge boxes do not sample the zero fill.
    fxg = np.clip(fxg, 0, img.width - 1)
    fyg = np.clip(fyg, 0, img.height - 1)
    out = _bilinear_gather(planes, fxg.astype(np.float32), fyg.astype(np.float32))
    return Tensor((out / 255.0)[None, :, :, :])


def scale_rotate(sample: np.ndarray, scale: float, angle_deg: float,
                 fill: float | str = 0.0) -> np.ndarray:
    """Similarity transform about the image center via inverse mapping.

    ``scale`` < 1 shrinks the content; positive angles rotate it
    counterclockwise. ``fill`` is the value for pixels that map outside the
    source, or ``"edge"`` to replicate border pixels.
    """
    if sample.ndim != 3:
        raise ShapeError(f"expected (C, H, W) sample, got shape {sample.shape}")
    if scale <= 0:
        raise GeometryError(f"scale must be positive, got {scale}")
    _, h, w = sample.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = np.deg2rad(angle_deg)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dx = xs - cx
    dy = ys - cy
    # Inverse of scale-then-rotate: rotate by -theta, divide by scale.
    src_x = (cos_t * dx + sin_t * dy) / scale + cx
    src_y = (-sin_t * dx + cos_t * dy) / scale + cy

    if fill == "edge":
        src_x = np.clip(src_x, 0, w - 1)
        src_y = np.clip(src_y, 0, h - 1)
        return _bilinear_gather(sample, src_x, src_y, fill=0.0)
    return _bilinear_gather(sample, src_x, src_y, fill=float(fill))


def draw_augment_params(rng: np.random.Generator) -> tuple[float, float]:
    """One (scale, angle-degrees) draw from the augmentation ranges."""
    scale = rng.uniform(*SCALE_RANGE)
    angle = rng.uniform(*ANGLE_RANGE_DEG)
    return scale, angle


def augment(sample: Tensor | np.ndarray, rng: np.random.Generator,
            fill: float | str = 0.0) -> Tensor | np.ndarray:
    """Random scale/rotation of one sample; deterministic given the generator."""
    if isinstance(sample, Tensor):
        if sample.shape[0] != 1:
            raise ShapeError(f"augment expects a single sample, got batch {sample.shape}")
        scale, angle = draw_augment_params(rng)
        return Tensor(scale_rotate(sample.data[0], scale, angle, fill)[None])
    scale, angle = draw_augment_params(rng)
    return scale_rotate(sample, scale, angle, fill)


def augment_batch(batch: np.ndarray, rng: np.random.Generator,
                  fill: float | str = 0.0) -> np.ndarray:
    """Independent random scale/rotation per sample of an (N, C, H, W) batch."""
    if batch.ndim != 4:
        raise ShapeError(f"expected (N, C, H, W) batch, got {batch.shape}")
    out = np.empty_like(batch)
    for i in range(batch.shape[0]):
        scale, angle = draw_augment_params(rng)
        out[i] = scale_rotate(batch[i], scale, angle, fill)
    return out
