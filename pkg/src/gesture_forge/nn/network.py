"""Sequential network container and the tongue-detection topology builder."""

from __future__ import annotations

import copy

import numpy as np

from ..errors import ShapeError
from .layers import BatchNorm2d, Conv2d, Flatten, Layer, Linear, MaxPool2d, ReLU
from .tensor import Parameter

INPUT_SHAPE = (3, 32, 32)


class Network:
    """An ordered stack of layers with shape validation at construction."""

    def __init__(self, layers: list[Layer], input_shape: tuple[int, int, int] = INPUT_SHAPE,
                 class_count: int | None = None):
        self.layers = layers
        self.input_shape = tuple(input_shape)
        shape = self.input_shape
        for layer in layers:
            shape = layer.out_shape(shape)
        if len(shape) != 1:
            raise ShapeError(f"network must end in a flat logit vector, got {shape}")
        self.class_count = class_count if class_count is not None else shape[0]
        if self.class_count != shape[0]:
            raise ShapeError(
                f"declared class count {class_count} != output dim {shape[0]}"
            )

    # -- execution ----------------------------------------------------------

    def forward(self, x: np.ndarray, training: bool = False,
                update_stats: bool | None = None) -> np.ndarray:
        n = x.shape[0]
        if tuple(x.shape[1:]) != self.input_shape:
            raise ShapeError(
                f"expected input shaped (N, {', '.join(map(str, self.input_shape))}), "
                f"got {x.shape}"
            )
        out = x
        for layer in self.layers:
            out = layer.forward(out, training=training, update_stats=update_stats)
        assert out.shape == (n, self.class_count)
        return out

    def backward(self, grad_logits: np.ndarray,
                 need_input_grad: bool = True) -> np.ndarray | None:
        """Backpropagate; parameter gradients accumulate into the layers.

        ``need_input_grad=False`` lets the first layer skip its input
        gradient (training never consumes it)."""
        grad = grad_logits
        for i, layer in reversed(list(enumerate(self.layers))):
            grad = layer.backward(grad, need_input_grad or i > 0)
        return grad

    # -- parameter bookkeeping ------------------------------------------------

    def parameters(self) -> list[Parameter]:
        return [p for layer in self.layers for p in layer.parameters()]

    def buffers(self) -> list[Parameter]:
        return [b for layer in self.layers for b in layer.buffers()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    @property
    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.parameters())

    def state_dict(self) -> dict[str, np.ndarray]:
        """Every parameter and running statistic, in layer order."""
        return {t.name: t.data for t in self.parameters() + self.buffers()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = {t.name: t for t in self.parameters() + self.buffers()}
        missing = sorted(set(own) - set(state))
        extra = sorted(set(state) - set(own))
        if missing or extra:
            raise ShapeError(f"state mismatch: missing={missing}, unexpected={extra}")
        for name, tensor in own.items():
            arr = np.asarray(state[name], dtype=tensor.data.dtype)
            if arr.shape != tensor.data.shape:
                raise ShapeError(
                    f"{name}: stored shape {arr.shape} != expected {tensor.data.shape}"
                )
            tensor.data = arr.copy()

    def topology(self) -> list[dict]:
        return [layer.descriptor() for layer in self.layers]

    # -- utilities -------------------------------------------------------------

    def clone(self) -> "Network":
        return copy.deepcopy(self)

    def astype(self, dtype) -> "Network":
        """Deep copy with every parameter/buffer cast to ``dtype``."""
        net = self.clone()
        for t in net.parameters() + net.buffers():
            t.data = t.data.astype(dtype)
            t.grad = t.grad.astype(dtype)
        return net


def build_tongue_net(class_count: int = 2, seed: int = 0) -> Network:
    """The fixed tongue-detection topology with seeded initialization.

    Three 3x3 conv blocks (96, 32, 64 filters, zero-padding 1), each followed
    by batch normalization and ReLU; the first two blocks end in 2x2/stride-2
    max pooling. A single fully connected layer maps the 64x8x8 activation to
    the class logits. Softmax is applied by the loss / predictor, not stored
    as a layer.
    """
    if class_count < 2:
        raise ShapeError(f"class_count must be >= 2, got {class_count}")
    rng = np.random.default_rng(seed)
    layers: list[Layer] = [
        Conv2d(3, 96, rng, name="conv1"),
        BatchNorm2d(96, name="bn1"),
        ReLU(),
        MaxPool2d(),
        Conv2d(96, 32, rng, name="conv2"),
        BatchNorm2d(32, name="bn2"),
        ReLU(),
        MaxPool2d(),
        Conv2d(32, 64, rng, name="conv3"),
        BatchNorm2d(64, name="bn3"),
        ReLU(),
        Flatten(),
        Linear(64 * 8 * 8, class_count, rng, name="fc"),
    ]
    return Network(layers, INPUT_SHAPE, class_count)


def build_from_topology(topology: list[dict], class_count: int, seed: int = 0) -> Network:
    """Reconstruct a network from checkpoint descriptors (weights loaded later)."""
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    counters = {"conv": 0, "batchnorm": 0, "fullyconnected": 0}
    for desc in topology:
        kind = desc.get("kind")
        if kind == "conv":
            counters["conv"] += 1
            layers.append(Conv2d(desc["in_channels"], desc["out_channels"], rng,
                                 ksize=desc["ksize"], pad=desc["pad"],
                                 stride=desc["stride"], name=f"conv{counters['conv']}"))
        elif kind == "batchnorm":
            counters["batchnorm"] += 1
            layers.append(BatchNorm2d(desc["channels"], eps=desc["eps"],
                                      stats_momentum=desc["stats_momentum"],
                                      name=f"bn{counters['batchnorm']}"))
        elif kind == "relu":
            layers.append(ReLU())
        elif kind == "maxpool":
            layers.append(MaxPool2d(desc["size"], desc["stride"]))
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "fullyconnected":
            counters["fullyconnected"] += 1
            layers.append(Linear(desc["in_features"], desc["out_features"], rng, name="fc"))
        else:
            raise ShapeError(f"unknown layer kind {kind!r} in topology")
    return Network(layers, INPUT_SHAPE, class_count)
