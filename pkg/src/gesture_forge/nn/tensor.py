"""Rank-4 tensors and trainable parameters backed by numpy arrays.

``Tensor`` is the currency for images and activations: a contiguous
``(batch, channels, height, width)`` float array with an optional gradient
buffer of the same shape. ``Parameter`` is the looser cousin used for layer
weights, which may be any rank.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError


class Tensor:
    """A contiguous NCHW float array with an optional gradient buffer."""

    __slots__ = ("data", "grad")

    def __init__(self, data: np.ndarray, grad: np.ndarray | None = None):
        data = np.ascontiguousarray(data)
        if data.ndim != 4:
            raise ShapeError(f"tensor must be rank 4 (N,C,H,W), got shape {data.shape}")
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float32)
        if not np.all(np.isfinite(data)):
            raise ShapeError("tensor holds non-finite values")
        if grad is not None:
            grad = np.ascontiguousarray(grad, dtype=data.dtype)
            if grad.shape != data.shape:
                raise ShapeError(
                    f"grad shape {grad.shape} != data shape {data.shape}"
                )
        self.data = data
        self.grad = grad

    @classmethod
    def from_array(cls, array, dtype=np.float32) -> "Tensor":
        return cls(np.asarray(array, dtype=dtype))

    @classmethod
    def zeros(cls, shape: tuple[int, int, int, int], dtype=np.float32) -> "Tensor":
        return cls(np.zeros(shape, dtype=dtype))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}, grad={'yes' if self.grad is not None else 'no'})"


class Parameter:
    """A trainable array plus its gradient buffer."""

    __slots__ = ("name", "data", "grad")

    def __init__(self, name: str, data: np.ndarray):
        self.name = name
        self.data = np.ascontiguousarray(data)
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def astype(self, dtype) -> "Parameter":
        p = Parameter(self.name, self.data.astype(dtype))
        p.grad = self.grad.astype(dtype)
        return p

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.data.shape})"


def as_nchw(x, dtype=None) -> np.ndarray:
    """Coerce a ``Tensor`` or array-like to a rank-4 ndarray."""
    arr = x.data if isinstance(x, Tensor) else np.asarray(x)
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    if arr.ndim != 4:
        raise ShapeError(f"expected rank-4 (N,C,H,W) input, got shape {arr.shape}")
    return arr
