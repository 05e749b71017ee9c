"""Stochastic gradient descent with classic heavy-ball momentum."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .tensor import Parameter


class SGDMomentum:
    """v <- momentum * v + grad;  param <- param - lr * v.

    One velocity buffer per parameter, zero-initialized before the first
    step.
    """

    def __init__(self, parameters: list[Parameter], learning_rate: float = 0.01,
                 momentum: float = 0.9):
        if learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {learning_rate}")
        if not 0.0 <= momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {momentum}")
        self.parameters = list(parameters)
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.velocities = [np.zeros_like(p.data) for p in self.parameters]

    def step(self) -> None:
        for p, v in zip(self.parameters, self.velocities):
            if p.grad.shape != p.data.shape:
                raise ShapeError(f"{p.name}: grad shape {p.grad.shape} != {p.data.shape}")
            v *= self.momentum
            v += p.grad
            p.data -= self.learning_rate * v

    def zero_grad(self) -> None:
        for p in self.parameters:
            p.zero_grad()
