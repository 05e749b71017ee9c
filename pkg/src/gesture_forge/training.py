"""Network training: stratified validation split, per-epoch shuffling and
augmentation, SGD with momentum, best-validation-loss model selection, and
the fine-tuning path that continues from a pretrained checkpoint.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DatasetError, DivergenceError, TransferError
from .nn import Network, SGDMomentum, build_tongue_net, softmax_cross_entropy
from .vision.transform import augment_batch

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    max_epochs: int = 50
    batch_size: int = 128
    learning_rate: float = 0.01
    momentum: float = 0.9
    validation_fraction: float = 0.15
    seed: int = 0
    augment: bool = True
    augment_fill: str = "zero"  # or "edge"
    class_weight: str | None = None  # None or "balanced"
    fine_tune_lr_scale: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")

    def to_dict(self) -> dict:
        return {
            "max_epochs": self.max_epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "momentum": self.momentum,
            "validation_fraction": self.validation_fraction,
            "seed": self.seed,
            "augment": self.augment,
            "augment_fill": self.augment_fill,
            "class_weight": self.class_weight,
            "fine_tune_lr_scale": self.fine_tune_lr_scale,
        }


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainingLog:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = float("inf")
    train_size: int = 0
    val_size: int = 0
    seed: int = 0


def stratified_validation_split(
    y: np.ndarray,
    groups: np.ndarray | None,
    fraction: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Hold out ``round(len(y) * fraction)`` samples, stratified by
    (group, class).

    Per-stratum quotas are floored; the remainder is assigned one sample at a
    time to the largest strata (ties broken by stratum key) so the total hits
    the target exactly whenever the strata can absorb it.
    """
    n = len(y)
    if groups is None:
        groups = np.zeros(n, dtype=np.int64)
    strata: dict[tuple, np.ndarray] = {}
    for key in sorted({(str(g), int(c)) for g, c in zip(groups, y)}):
        mask = (groups.astype(str) == key[0]) & (y == key[1])
        strata[key] = np.flatnonzero(mask)

    target = int(round(n * fraction))
    quotas = {k: int(len(idx) * fraction) for k, idx in strata.items()}
    remainder = target - sum(quotas.values())
    by_size = sorted(strata, key=lambda k: (-len(strata[k]), k))
    i = 0
    while remainder > 0 and any(quotas[k] < len(strata[k]) for k in by_size):
        k = by_size[i % len(by_size)]
        if quotas[k] < len(strata[k]):
            quotas[k] += 1
            remainder -= 1
        i += 1

    val_parts = []
    for k in sorted(strata):
        idx = strata[k]
        take = quotas[k]
        if take:
            picked = rng.permutation(len(idx))[:take]
            val_parts.append(idx[picked])
    val_idx = np.sort(np.concatenate(val_parts)) if val_parts else np.array([], dtype=np.int64)
    train_mask = np.ones(n, dtype=bool)
    train_mask[val_idx] = False
    return np.flatnonzero(train_mask), val_idx


def _evaluate(net: Network, X: np.ndarray, y: np.ndarray,
              class_weights: np.ndarray | None, batch_size: int = 256) -> tuple[float, float]:
    """Inference-mode mean loss and accuracy."""
    losses, hits = [], 0
    for start in range(0, len(X), batch_size):
        xb = X[start : start + batch_size]
        yb = y[start : start + batch_size]
        logits = net.forward(xb, training=False)
        loss, probs, _ = softmax_cross_entropy(logits, yb, class_weights)
        losses.append(loss * len(xb))
        hits += int((probs.argmax(axis=1) == yb).sum())
    return float(np.sum(losses) / len(X)), hits / len(X)


def _class_weights(y: np.ndarray, class_count: int, mode: str | None) -> np.ndarray | None:
    if mode is None:
        return None
    if mode != "balanced":
        raise ValueError(f"unknown class_weight mode {mode!r}")
    counts = np.bincount(y, minlength=class_count).astype(np.float64)
    weights = len(y) / (class_count * np.maximum(counts, 1))
    return weights


def train_network(
    net: Network,
    X: np.ndarray,
    y: np.ndarray,
    groups: np.ndarray | None = None,
    config: TrainConfig | None = None,
) -> tuple[Network, TrainingLog]:
    """Train ``net`` in place and return it with the best-validation weights.

    Online augmentation redraws scale/rotation for both the training and the
    validation portion every epoch. The returned weights are the snapshot
    from the epoch with the lowest validation loss.
    """
    config = config or TrainConfig()
    X = np.ascontiguousarray(X, dtype=np.float32)
    y = np.asarray(y)
    present = set(np.unique(y).tolist())
    missing = set(range(net.class_count)) - present
    if missing:
        raise DatasetError(f"training set has no samples for class(es) {sorted(missing)}")

    log_out = TrainingLog(seed=config.seed)
    if config.max_epochs == 0:
        return net, log_out

    rng_split = np.random.default_rng((config.seed, 0))
    train_idx, val_idx = stratified_validation_split(
        y, groups, config.validation_fraction, rng_split
    )
    if len(val_idx) == 0:
        log.warning("validation split is empty; selecting on training loss")
    X_train, y_train = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]
    log_out.train_size = len(train_idx)
    log_out.val_size = len(val_idx)

    weights = _class_weights(y_train, net.class_count, config.class_weight)
    optimizer = SGDMomentum(net.parameters(), config.learning_rate, config.momentum)
    shuffle_rng = np.random.default_rng((config.seed, 1))
    fill = 0.0 if config.augment_fill == "zero" else "edge"

    best_state: dict | None = None
    for epoch in range(config.max_epochs):
        aug_rng = np.random.default_rng((config.seed, 2, epoch))
        order = shuffle_rng.permutation(len(X_train))
        epoch_loss, epoch_hits = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            xb = X_train[batch]
            if config.augment:
                xb = augment_batch(xb, aug_rng, fill)
            yb = y_train[batch]
            logits = net.forward(xb, training=True)
            loss, probs, grad = softmax_cross_entropy(logits, yb, weights)
            if not np.isfinite(loss):
                raise DivergenceError(epoch)
            net.zero_grad()
            net.backward(grad)
            optimizer.step()
            epoch_loss += loss * len(batch)
            epoch_hits += int((probs.argmax(axis=1) == yb).sum())
        train_loss = epoch_loss / len(order)
        train_acc = epoch_hits / len(order)

        if len(val_idx):
            xv = X_val
            if config.augment:
                xv = augment_batch(xv, aug_rng, fill)
            val_loss, val_acc = _evaluate(net, xv, y_val, weights)
        else:
            val_loss, val_acc = train_loss, train_acc
        if not np.isfinite(val_loss):
            raise DivergenceError(epoch)

        log_out.epochs.append(
            EpochStats(epoch, train_loss, train_acc, val_loss, val_acc)
        )
        if val_loss < log_out.best_val_loss:
            log_out.best_val_loss = val_loss
            log_out.best_epoch = epoch
            best_state = {k: v.copy() for k, v in net.state_dict().items()}
        log.debug("epoch %d: train %.4f/%.3f val %.4f/%.3f",
                  epoch, train_loss, train_acc, val_loss, val_acc)

    if best_state is not None:
        net.load_state_dict(best_state)
    return net, log_out


def predict(net: Network, X: np.ndarray, batch_size: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Inference-mode class indices and probability rows.

    Ties break toward the lower class index (argmax takes the first maximum).
    """
    X = np.ascontiguousarray(X, dtype=np.float32)
    probs_parts = []
    for start in range(0, len(X), batch_size):
        logits = net.forward(X[start : start + batch_size], training=False)
        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs_parts.append(exp / exp.sum(axis=1, keepdims=True))
    probs = np.concatenate(probs_parts) if probs_parts else np.zeros((0, net.class_count))
    return probs.argmax(axis=1), probs


def fine_tune(
    pretrained: Network,
    X: np.ndarray,
    y: np.ndarray,
    groups: np.ndarray | None = None,
    config: TrainConfig | None = None,
) -> tuple[Network, TrainingLog]:
    """Continue training from pretrained weights on a new cohort.

    Every layer stays trainable; the learning rate is the configured base
    rate scaled down by ``fine_tune_lr_scale``. With ``max_epochs == 0`` the
    returned network predicts exactly like the pretrained one.
    """
    config = config or TrainConfig()
    reference = build_tongue_net(class_count=pretrained.class_count)
    if pretrained.topology() != reference.topology():
        raise TransferError("pretrained topology does not match the expected network")
    data_classes = len(np.unique(np.asarray(y)))
    if data_classes != pretrained.class_count:
        raise TransferError(
            f"checkpoint has {pretrained.class_count} classes but the fine-tune "
            f"data has {data_classes}"
        )
    tuned = copy.deepcopy(pretrained)
    ft_config = replace(
        config, learning_rate=config.learning_rate * config.fine_tune_lr_scale
    )
    return train_network(tuned, X, y, groups, ft_config)
