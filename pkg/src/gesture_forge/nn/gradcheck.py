"""Finite-difference validation of analytic gradients.

Central differences, (f(x+eps) - f(x-eps)) / 2 eps, are compared against the
backward-pass gradients over a random sample of coordinates per tensor. The
checker runs the very same kernels as training; because the kernels are
dtype-generic it can probe in float64 for tight tolerances or in float32 to
measure the production precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import CheckInvalidError
from .layers import softmax_cross_entropy
from .network import Network


@dataclass
class GradCheckReport:
    """Per-target maxima of the relative gradient error."""

    epsilon: float
    dtype: str
    per_target: dict[str, float] = field(default_factory=dict)

    @property
    def max_relative_error(self) -> float:
        return max(self.per_target.values()) if self.per_target else 0.0

    def passed(self, threshold: float = 1e-3) -> bool:
        return self.max_relative_error <= threshold


def default_epsilon(dtype) -> float:
    # Central differences trade truncation against rounding; the sweet spot
    # scales with the cube root of the machine epsilon.
    return 1e-5 if np.dtype(dtype) == np.float64 else 1e-2


def max_relative_error(
    loss_fn: Callable[[], float],
    targets: list[tuple[str, np.ndarray, np.ndarray]],
    epsilon: float,
    rng: np.random.Generator,
    samples_per_target: int = 20,
    floor: float = 1e-6,
) -> dict[str, float]:
    """Probe sampled coordinates of each (name, array, analytic_grad) target.

    Arrays are perturbed in place and restored. The relative error uses
    ``|a - n| / max(|a|, |n|, floor)`` so exactly-zero gradients compare
    cleanly.
    """
    out: dict[str, float] = {}
    for name, arr, agrad in targets:
        flat = arr.reshape(-1)
        aflat = agrad.reshape(-1)
        n = flat.size
        if samples_per_target and samples_per_target < n:
            idx = rng.choice(n, size=samples_per_target, replace=False)
        else:
            idx = np.arange(n)
        worst = 0.0
        for i in idx:
            orig = flat[i]
            flat[i] = orig + epsilon
            plus = loss_fn()
            flat[i] = orig - epsilon
            minus = loss_fn()
            flat[i] = orig
            numeric = (plus - minus) / (2.0 * epsilon)
            analytic = float(aflat[i])
            denom = max(abs(analytic), abs(numeric), floor)
            worst = max(worst, abs(analytic - numeric) / denom)
        out[name] = worst
    return out


def check_network(
    net: Network,
    x: np.ndarray,
    labels: np.ndarray,
    epsilon: float | None = None,
    dtype=np.float64,
    samples_per_target: int = 20,
    seed: int = 0,
    update_stats: bool = False,
) -> GradCheckReport:
    """Check d(loss)/d(input) and every parameter gradient of ``net``.

    The forward pass runs in training mode with frozen batch-norm running
    statistics; letting the statistics drift between probes would make the
    loss non-deterministic, so that configuration is rejected.
    """
    if update_stats:
        raise CheckInvalidError(
            "gradient check requires a side-effect-free forward pass; "
            "run with update_stats=False"
        )
    dtype = np.dtype(dtype)
    if epsilon is None:
        epsilon = default_epsilon(dtype)
    work = net.astype(dtype)
    xw = x.astype(dtype).copy()
    labels = np.asarray(labels)

    def loss_fn() -> float:
        logits = work.forward(xw, training=True, update_stats=False)
        loss, _, _ = softmax_cross_entropy(logits, labels)
        return loss

    work.zero_grad()
    logits = work.forward(xw, training=True, update_stats=False)
    _, _, grad_logits = softmax_cross_entropy(logits, labels)
    grad_input = work.backward(grad_logits)

    targets = [("input", xw, grad_input.copy())]
    targets += [(p.name, p.data, p.grad.copy()) for p in work.parameters()]

    rng = np.random.default_rng(seed)
    per_target = max_relative_error(
        loss_fn, targets, epsilon, rng, samples_per_target
    )
    return GradCheckReport(epsilon=epsilon, dtype=dtype.name, per_target=per_target)


def check_softmax_cross_entropy(
    n: int = 6,
    k: int = 3,
    epsilon: float | None = None,
    dtype=np.float64,
    seed: int = 0,
) -> GradCheckReport:
    """Check d(loss)/d(logits) of the softmax cross-entropy head."""
    dtype = np.dtype(dtype)
    if epsilon is None:
        epsilon = default_epsilon(dtype)
    rng = np.random.default_rng(seed)
    logits = rng.standard_normal((n, k)).astype(dtype)
    labels = rng.integers(0, k, n)

    def loss_fn() -> float:
        return softmax_cross_entropy(logits, labels)[0]

    _, _, grad = softmax_cross_entropy(logits, labels)
    per_target = max_relative_error(
        loss_fn, [("logits", logits, grad.copy())], epsilon, rng, samples_per_target=0
    )
    return GradCheckReport(epsilon=epsilon, dtype=dtype.name, per_target=per_target)


def check_layer(
    layer,
    x: np.ndarray,
    epsilon: float | None = None,
    dtype=np.float64,
    samples_per_target: int = 20,
    seed: int = 0,
) -> GradCheckReport:
    """Check one layer under the scalar loss <r, layer(x)> with fixed r."""
    dtype = np.dtype(dtype)
    if epsilon is None:
        epsilon = default_epsilon(dtype)
    rng = np.random.default_rng(seed)
    xw = x.astype(dtype).copy()

    probe = layer.forward(xw, training=True, update_stats=False)
    r = rng.standard_normal(probe.shape).astype(dtype)

    def loss_fn() -> float:
        y = layer.forward(xw, training=True, update_stats=False)
        return float((y * r).sum())

    for p in layer.parameters():
        p.data = p.data.astype(dtype)
        p.grad = np.zeros_like(p.data)
    grad_input = layer.backward(r)

    targets = [("input", xw, grad_input.copy())]
    targets += [(p.name, p.data, p.grad.copy()) for p in layer.parameters()]
    per_target = max_relative_error(loss_fn, targets, epsilon, rng, samples_per_target)
    return GradCheckReport(epsilon=epsilon, dtype=dtype.name, per_target=per_target)
