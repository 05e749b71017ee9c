"""Summed-area tables for constant-time rectangle sums over intensities."""

from __future__ import annotations

import numpy as np

from ..errors import GeometryError


class IntegralImage:
    """(H+1, W+1) cumulative tables of intensity and squared intensity.

    Integer arithmetic throughout: int64 cannot overflow for 8-bit images up
    to 4096x4096 (255^2 * 4096^2 < 2^63).
    """

    def __init__(self, gray: np.ndarray):
        if gray.ndim != 2:
            raise GeometryError(f"expected a 2-D intensity plane, got {gray.shape}")
        self.height, self.width = gray.shape
        g = gray.astype(np.int64)
        self.sums = np.zeros((self.height + 1, self.width + 1), dtype=np.int64)
        self.sq_sums = np.zeros_like(self.sums)
        np.cumsum(np.cumsum(g, axis=0), axis=1, out=self.sums[1:, 1:])
        np.cumsum(np.cumsum(g * g, axis=0), axis=1, out=self.sq_sums[1:, 1:])

    def _check(self, x: int, y: int, w: int, h: int) -> None:
        if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > self.width or y + h > self.height:
            raise GeometryError(
                f"rectangle ({x},{y},{w},{h}) outside {self.width}x{self.height}"
            )

    def rect_sum(self, x: int, y: int, w: int, h: int) -> int:
        """Four-lookup sum of the w*h rectangle with top-left corner (x, y)."""
        self._check(x, y, w, h)
        t = self.sums
        return int(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])

    def rect_sq_sum(self, x: int, y: int, w: int, h: int) -> int:
        self._check(x, y, w, h)
        t = self.sq_sums
        return int(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])

    def window_variance(self, x: int, y: int, w: int, h: int) -> tuple[float, float]:
        """(mean, variance) of the intensities inside the window."""
        area = w * h
        s1 = self.rect_sum(x, y, w, h)
        s2 = self.rect_sq_sum(x, y, w, h)
        mean = s1 / area
        return mean, s2 / area - mean * mean
