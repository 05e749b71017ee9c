"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .nn import INPUT_SHAPE
from .nn.tensor import Tensor


def check_image_batch(X, allow_flat: bool = True) -> np.ndarray:
    """Coerce to a float32 (N, 3, 32, 32) batch.

    Accepts a ``Tensor``, an (N, C, H, W) array, or, when ``allow_flat``,
    an (N, 3072) matrix (the flattened layout sklearn tooling tends to
    produce).
    """
    if isinstance(X, Tensor):
        arr = X.data
    else:
        arr = np.asarray(X)
    flat_dim = int(np.prod(INPUT_SHAPE))
    if allow_flat and arr.ndim == 2 and arr.shape[1] == flat_dim:
        arr = arr.reshape(len(arr), *INPUT_SHAPE)
    if arr.ndim != 4 or tuple(arr.shape[1:]) != INPUT_SHAPE:
        raise ShapeError(
            f"expected (N, {', '.join(map(str, INPUT_SHAPE))}) or (N, {flat_dim}) "
            f"input, got {arr.shape}"
        )
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise ShapeError("input batch holds non-finite values")
    return arr


def check_groups(groups, n: int) -> np.ndarray | None:
    if groups is None:
        return None
    groups = np.asarray(groups)
    if groups.shape != (n,):
        raise ShapeError(f"groups shape {groups.shape} != ({n},)")
    return groups
