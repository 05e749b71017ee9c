"""Forward and backward kernels for the layers the gesture network uses.

Every kernel is a pure function over ndarrays in NCHW layout; the thin layer
classes at the bottom add parameter storage and caching so a network can be
assembled and trained. Gradients are exact analytic derivatives of the
forward computations and are validated against finite differences in the
test suite.

All kernels preserve the dtype of their input, so the same code path runs in
float32 for training and float64 for tight gradient checking.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    DegenerateBatchError,
    LabelError,
    ShapeError,
    GeometryError,
)
from .tensor import Parameter

# Test-only fault injection: names added here flip deliberate bugs on so the
# gradient checker's failure path can be exercised.
_fault_injection: set[str] = set()


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _conv_out_extent(extent: int, ksize: int, pad: int, stride: int) -> int:
    span = extent + 2 * pad - ksize
    if span < 0:
        raise GeometryError(
            f"kernel {ksize} does not fit input extent {extent} with pad {pad}"
        )
    if span % stride != 0:
        raise GeometryError(
            f"non-integer output extent: ({extent} + 2*{pad} - {ksize}) / {stride}"
        )
    return span // stride + 1


def _im2col(x: np.ndarray, kh: int, kw: int, pad: int, stride: int) -> np.ndarray:
    """Gather conv receptive fields into a (N*OH*OW, C*KH*KW) matrix."""
    n, c, h, w = x.shape
    oh = _conv_out_extent(h, kh, pad, stride)
    ow = _conv_out_extent(w, kw, pad, stride)
    if pad:
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    else:
        xp = x
    # One tap at a time: kh*kw strided copies beat a giant gather.
    cols = np.empty((n, oh, ow, c, kh, kw), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            tap = xp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
            cols[:, :, :, :, i, j] = tap.transpose(0, 2, 3, 1)
    return cols.reshape(n * oh * ow, c * kh * kw)


def conv2d_forward(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    pad: int = 1,
    stride: int = 1,
    return_cols: bool = False,
):
    """Cross-correlate ``x`` (N,C,H,W) with ``weight`` (F,C,KH,KW) plus bias.

    The input is zero-padded by ``pad`` on every spatial edge. With
    ``return_cols`` the im2col matrix is returned alongside the output so the
    backward pass can reuse it.
    """
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(
            f"conv2d expects rank-4 input and weight, got {x.shape} and {weight.shape}"
        )
    n, c, h, w = x.shape
    f, cw, kh, kw = weight.shape
    if c != cw:
        raise ShapeError(f"input has {c} channels but kernels expect {cw}")
    if bias.shape != (f,):
        raise ShapeError(f"bias shape {bias.shape} != ({f},)")
    if pad < 0 or stride < 1:
        raise GeometryError(f"invalid pad={pad} / stride={stride}")
    oh = _conv_out_extent(h, kh, pad, stride)
    ow = _conv_out_extent(w, kw, pad, stride)

    cols = _im2col(x, kh, kw, pad, stride)
    out = cols @ weight.reshape(f, -1).T + bias
    y = np.ascontiguousarray(out.reshape(n, oh, ow, f).transpose(0, 3, 1, 2))
    return (y, cols) if return_cols else y


def conv2d_backward(
    x: np.ndarray,
    weight: np.ndarray,
    grad_out: np.ndarray,
    pad: int = 1,
    stride: int = 1,
    cols: np.ndarray | None = None,
    need_input_grad: bool = True,
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients of a scalar loss wrt conv input, weights, and bias.

    ``grad_out`` must match the forward output shape; the bias gradient is
    the per-filter sum of ``grad_out``. ``cols`` may pass the im2col matrix
    cached from the forward pass; ``need_input_grad=False`` skips the input
    gradient (first-layer optimization) and returns ``None`` for it.
    """
    n, c, h, w = x.shape
    f, _, kh, kw = weight.shape
    oh = _conv_out_extent(h, kh, pad, stride)
    ow = _conv_out_extent(w, kw, pad, stride)
    if grad_out.shape != (n, f, oh, ow):
        raise ShapeError(
            f"grad_out shape {grad_out.shape} != forward output {(n, f, oh, ow)}"
        )

    gout = np.ascontiguousarray(grad_out.transpose(0, 2, 3, 1)).reshape(n * oh * ow, f)
    if cols is None:
        cols = _im2col(x, kh, kw, pad, stride)

    grad_weight = (gout.T @ cols).reshape(weight.shape)
    grad_bias = gout.sum(axis=0)

    if not need_input_grad:
        return None, grad_weight, grad_bias

    # Scatter column gradients back onto the padded input, one kernel tap at
    # a time; nine vectorized adds for a 3x3 kernel.
    gcols = (gout @ weight.reshape(f, -1)).reshape(n, oh, ow, c, kh, kw)
    gxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            gxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += (
                gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            )
    grad_x = gxp[:, :, pad : pad + h, pad : pad + w]
    if pad:
        grad_x = grad_x.copy()
    if "conv_input_grad_sign_flip" in _fault_injection:
        grad_x = -grad_x
    return grad_x, grad_weight, grad_bias


# ---------------------------------------------------------------------------
# batch normalization
# ---------------------------------------------------------------------------

def batchnorm_forward(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    *,
    eps: float = 1e-5,
    stats_momentum: float = 0.1,
    training: bool = True,
    update_stats: bool | None = None,
):
    """Per-channel normalization over the (N,H,W) axes.

    Training mode normalizes by batch statistics (biased variance) and, when
    ``update_stats`` (defaults to ``training``), folds them into the running
    statistics with ``stats_momentum``; the running variance uses the
    unbiased estimate. Inference mode normalizes by the running statistics.

    Returns ``(y, cache, running_mean, running_var)``; the returned stats are
    fresh arrays when updated, otherwise the ones passed in.
    """
    n, c, h, w = x.shape
    if weight.shape != (c,) or bias.shape != (c,):
        raise ShapeError(f"batchnorm parameters must have shape ({c},)")
    if update_stats is None:
        update_stats = training

    if training:
        m = n * h * w
        if m < 2:
            raise DegenerateBatchError(
                f"batch statistics need at least 2 values per channel, got {m}"
            )
        mean = x.mean(axis=(0, 2, 3), keepdims=True)
        xc = x - mean
        var = np.einsum("nchw,nchw->c", xc, xc) / m
        if update_stats:
            running_mean = (1.0 - stats_momentum) * running_mean + stats_momentum * mean.reshape(-1)
            running_var = (
                1.0 - stats_momentum
            ) * running_var + stats_momentum * var * (m / (m - 1))
    else:
        mean = running_mean.reshape(1, c, 1, 1)
        var = running_var
        xc = x - mean

    inv_std = (1.0 / np.sqrt(var + eps)).astype(x.dtype)
    xhat = xc
    xhat *= inv_std[None, :, None, None]
    y = weight[None, :, None, None] * xhat + bias[None, :, None, None]
    cache = (xhat, inv_std, weight, training)
    return y, cache, running_mean, running_var


def batchnorm_backward(grad_out: np.ndarray, cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients wrt input, weight, bias for ``batchnorm_forward``."""
    xhat, inv_std, weight, training = cache
    if grad_out.shape != xhat.shape:
        raise ShapeError(f"grad_out shape {grad_out.shape} != input {xhat.shape}")
    axes = (0, 2, 3)
    grad_weight = np.einsum("nchw,nchw->c", grad_out, xhat)
    grad_bias = grad_out.sum(axis=axes)

    gscaled = grad_out * weight[None, :, None, None]
    if training:
        m = xhat.shape[0] * xhat.shape[2] * xhat.shape[3]
        mean_g = gscaled.mean(axis=axes)
        mean_gx = np.einsum("nchw,nchw->c", gscaled, xhat) / m
        grad_x = gscaled
        grad_x -= mean_g[None, :, None, None]
        grad_x -= xhat * mean_gx[None, :, None, None]
        grad_x *= inv_std[None, :, None, None]
    else:
        grad_x = gscaled
        grad_x *= inv_std[None, :, None, None]
    return grad_x, grad_weight, grad_bias


# ---------------------------------------------------------------------------
# activation / pooling
# ---------------------------------------------------------------------------

def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(x, 0)."""
    return np.maximum(x, 0)


def relu_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    if grad_out.shape != x.shape:
        raise ShapeError(f"grad_out shape {grad_out.shape} != input {x.shape}")
    return grad_out * (x > 0)


def maxpool_forward(
    x: np.ndarray, size: int = 2, stride: int = 2
) -> tuple[np.ndarray, np.ndarray]:
    """Window maxima plus the winning flat index per window.

    Floor geometry: trailing rows/columns that do not fill a window are
    dropped. Ties resolve to the first (row-major) position, so the argmax
    map is deterministic.
    """
    n, c, h, w = x.shape
    if h < size or w < size:
        raise GeometryError(f"input {h}x{w} smaller than pooling window {size}x{size}")
    oh = (h - size) // stride + 1
    ow = (w - size) // stride + 1
    # One strided slice per in-window tap, stacked on a trailing axis; the
    # row-major tap order makes argmax deterministic (first maximum wins).
    windows = np.stack(
        [
            x[:, :, dy : dy + stride * oh : stride, dx : dx + stride * ow : stride]
            for dy in range(size)
            for dx in range(size)
        ],
        axis=-1,
    )
    local = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, local[..., None], axis=-1)[..., 0]

    # Convert the in-window index to a flat index into the H*W plane.
    rows = (np.arange(oh) * stride)[None, None, :, None] + local // size
    cols = (np.arange(ow) * stride)[None, None, None, :] + local % size
    argmax = (rows * w + cols).astype(np.int64)
    return np.ascontiguousarray(out), argmax


def maxpool_backward(
    argmax: np.ndarray, grad_out: np.ndarray, input_shape: tuple[int, int, int, int]
) -> np.ndarray:
    """Route each window's output gradient to its argmax position."""
    n, c, h, w = input_shape
    if grad_out.shape != argmax.shape:
        raise ShapeError(
            f"grad_out shape {grad_out.shape} != argmax map shape {argmax.shape}"
        )
    if argmax.shape[0] != n or argmax.shape[1] != c or argmax.max(initial=0) >= h * w:
        raise ShapeError("argmax map does not belong to an input of this shape")
    grad_x = np.zeros((n, c, h * w), dtype=grad_out.dtype)
    flat_idx = argmax.reshape(n, c, -1)
    np.add.at(
        grad_x,
        (np.arange(n)[:, None, None], np.arange(c)[None, :, None], flat_idx),
        grad_out.reshape(n, c, -1),
    )
    return grad_x.reshape(n, c, h, w)


# ---------------------------------------------------------------------------
# fully connected / loss
# ---------------------------------------------------------------------------

def linear_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map y = x @ W.T + b for x of shape (N, D)."""
    if x.ndim != 2:
        raise ShapeError(f"linear input must be rank 2 (N,D), got {x.shape}")
    if x.shape[1] != weight.shape[1]:
        raise ShapeError(
            f"input feature dim {x.shape[1]} != weight input dim {weight.shape[1]}"
        )
    return x @ weight.T + bias


def linear_backward(
    x: np.ndarray, weight: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if grad_out.shape != (x.shape[0], weight.shape[0]):
        raise ShapeError(
            f"grad_out shape {grad_out.shape} != ({x.shape[0]}, {weight.shape[0]})"
        )
    return grad_out @ weight, grad_out.T @ x, grad_out.sum(axis=0)


def softmax_cross_entropy(
    logits: np.ndarray,
    labels: np.ndarray,
    class_weights: np.ndarray | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Row-wise softmax with mean negative log-likelihood.

    Probabilities are computed with max-subtraction so huge logits cannot
    overflow. Returns ``(loss, probabilities, grad_logits)`` where
    ``grad_logits`` is the gradient of the mean loss.
    """
    if logits.ndim != 2:
        raise ShapeError(f"logits must be rank 2 (N,K), got {logits.shape}")
    n, k = logits.shape
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} != ({n},)")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= k:
        raise LabelError(f"labels must lie in [0, {k})")

    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    log_probs = shifted - np.log(exp.sum(axis=1, keepdims=True))

    picked = log_probs[np.arange(n), labels]
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), labels] = 1.0

    if class_weights is None:
        loss = float(-picked.mean())
        grad = (probs - onehot) / n
    else:
        w = np.asarray(class_weights, dtype=logits.dtype)[labels]
        total = w.sum()
        loss = float(-(w * picked).sum() / total)
        grad = (probs - onehot) * (w / total)[:, None]
    return loss, probs, grad


# ---------------------------------------------------------------------------
# layer objects
# ---------------------------------------------------------------------------

def kaiming_normal(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape).astype(np.float32)


class Layer:
    """Common surface: forward/backward with parameter bookkeeping."""

    def parameters(self) -> list[Parameter]:
        return []

    def buffers(self) -> list[Parameter]:
        """Non-trainable state that still belongs in a checkpoint."""
        return []

    def descriptor(self) -> dict:
        raise NotImplementedError

    def out_shape(self, in_shape: tuple[int, int, int]) -> tuple[int, int, int]:
        """(C,H,W) -> (C,H,W); flattening layers return (D,)."""
        raise NotImplementedError

    def forward(self, x: np.ndarray, training: bool = False, update_stats: bool | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray, need_input_grad: bool = True) -> np.ndarray:
        raise NotImplementedError


class Conv2d(Layer):
    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator,
                 ksize: int = 3, pad: int = 1, stride: int = 1, name: str = "conv"):
        fan_in = in_channels * ksize * ksize
        self.weight = Parameter(
            f"{name}.weight",
            kaiming_normal(rng, (out_channels, in_channels, ksize, ksize), fan_in),
        )
        self.bias = Parameter(f"{name}.bias", np.zeros(out_channels, dtype=np.float32))
        self.pad = pad
        self.stride = stride
        self._x: np.ndarray | None = None
        self._cols: np.ndarray | None = None

    def parameters(self):
        return [self.weight, self.bias]

    def descriptor(self):
        f, c, kh, _ = self.weight.data.shape
        return {"kind": "conv", "in_channels": c, "out_channels": f,
                "ksize": kh, "pad": self.pad, "stride": self.stride}

    def out_shape(self, in_shape):
        c, h, w = in_shape
        f, cw, kh, kw = self.weight.data.shape
        if c != cw:
            raise ShapeError(f"conv expects {cw} input channels, got {c}")
        return (f,
                _conv_out_extent(h, kh, self.pad, self.stride),
                _conv_out_extent(w, kw, self.pad, self.stride))

    def forward(self, x, training=False, update_stats=None):
        self._x = x
        y, self._cols = conv2d_forward(x, self.weight.data, self.bias.data,
                                       self.pad, self.stride, return_cols=True)
        return y

    def backward(self, grad_out, need_input_grad=True):
        gx, gw, gb = conv2d_backward(
            self._x, self.weight.data, grad_out, self.pad, self.stride,
            cols=self._cols, need_input_grad=need_input_grad,
        )
        self._cols = None
        self.weight.grad += gw
        self.bias.grad += gb
        return gx


class BatchNorm2d(Layer):
    def __init__(self, channels: int, eps: float = 1e-5, stats_momentum: float = 0.1,
                 name: str = "batchnorm"):
        self.weight = Parameter(f"{name}.weight", np.ones(channels, dtype=np.float32))
        self.bias = Parameter(f"{name}.bias", np.zeros(channels, dtype=np.float32))
        self.running_mean = Parameter(f"{name}.running_mean", np.zeros(channels, dtype=np.float32))
        self.running_var = Parameter(f"{name}.running_var", np.ones(channels, dtype=np.float32))
        self.eps = eps
        self.stats_momentum = stats_momentum
        self._cache = None

    def parameters(self):
        return [self.weight, self.bias]

    def buffers(self):
        return [self.running_mean, self.running_var]

    def descriptor(self):
        return {"kind": "batchnorm", "channels": self.weight.data.shape[0],
                "eps": self.eps, "stats_momentum": self.stats_momentum}

    def out_shape(self, in_shape):
        c = in_shape[0]
        if c != self.weight.data.shape[0]:
            raise ShapeError(f"batchnorm expects {self.weight.data.shape[0]} channels, got {c}")
        return in_shape

    def forward(self, x, training=False, update_stats=None):
        y, cache, rm, rv = batchnorm_forward(
            x, self.weight.data, self.bias.data,
            self.running_mean.data, self.running_var.data,
            eps=self.eps, stats_momentum=self.stats_momentum,
            training=training, update_stats=update_stats,
        )
        self.running_mean.data = np.asarray(rm, dtype=self.running_mean.data.dtype)
        self.running_var.data = np.asarray(rv, dtype=self.running_var.data.dtype)
        self._cache = cache
        return y

    def backward(self, grad_out, need_input_grad=True):
        gx, gw, gb = batchnorm_backward(grad_out, self._cache)
        self.weight.grad += gw
        self.bias.grad += gb
        return gx


class ReLU(Layer):
    def __init__(self):
        self._x = None

    def descriptor(self):
        return {"kind": "relu"}

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training=False, update_stats=None):
        self._x = x
        return relu(x)

    def backward(self, grad_out, need_input_grad=True):
        return relu_backward(grad_out, self._x)


class MaxPool2d(Layer):
    def __init__(self, size: int = 2, stride: int = 2):
        self.size = size
        self.stride = stride
        self._argmax = None
        self._in_shape = None

    def descriptor(self):
        return {"kind": "maxpool", "size": self.size, "stride": self.stride}

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if h < self.size or w < self.size:
            raise GeometryError(f"input {h}x{w} smaller than pool window {self.size}")
        return (c, (h - self.size) // self.stride + 1, (w - self.size) // self.stride + 1)

    def forward(self, x, training=False, update_stats=None):
        y, self._argmax = maxpool_forward(x, self.size, self.stride)
        self._in_shape = x.shape
        return y

    def backward(self, grad_out, need_input_grad=True):
        return maxpool_backward(self._argmax, grad_out, self._in_shape)


class Flatten(Layer):
    def __init__(self):
        self._in_shape = None

    def descriptor(self):
        return {"kind": "flatten"}

    def out_shape(self, in_shape):
        c, h, w = in_shape
        return (c * h * w,)

    def forward(self, x, training=False, update_stats=None):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out, need_input_grad=True):
        return grad_out.reshape(self._in_shape)


class Linear(Layer):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 name: str = "fc"):
        self.weight = Parameter(
            f"{name}.weight", kaiming_normal(rng, (out_features, in_features), in_features)
        )
        self.bias = Parameter(f"{name}.bias", np.zeros(out_features, dtype=np.float32))
        self._x = None

    def parameters(self):
        return [self.weight, self.bias]

    def descriptor(self):
        k, d = self.weight.data.shape
        return {"kind": "fullyconnected", "in_features": d, "out_features": k}

    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ShapeError(f"linear layer needs flattened input, got shape {in_shape}")
        if in_shape[0] != self.weight.data.shape[1]:
            raise ShapeError(
                f"linear expects {self.weight.data.shape[1]} features, got {in_shape[0]}"
            )
        return (self.weight.data.shape[0],)

    def forward(self, x, training=False, update_stats=None):
        self._x = x
        return linear_forward(x, self.weight.data, self.bias.data)

    def backward(self, grad_out, need_input_grad=True):
        gx, gw, gb = linear_backward(self._x, self.weight.data, grad_out)
        self.weight.grad += gw
        self.bias.grad += gb
        return gx
