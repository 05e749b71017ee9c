"""scikit-learn compatible estimators wrapping the pipeline.

``TongueNetClassifier`` exposes the CNN through the familiar
fit/predict/predict_proba surface so it slots into sklearn tooling
(``cross_val_score``, ``GroupKFold``, pipelines). ``FaceCropExtractor`` is
the matching transformer for raw frames: detect the face, crop, and resize
to network resolution.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .checkpoint import load_checkpoint, save_checkpoint
from .nn import build_tongue_net
from .training import TrainConfig, fine_tune, predict, train_network
from .validation import check_groups, check_image_batch
from .vision.cascade import CascadeModel, detect_faces
from .vision.image import ImageBuffer
from .vision.transform import crop_resize


class TongueNetClassifier(ClassifierMixin, BaseEstimator):
    """Tongue-gesture CNN with an sklearn estimator surface.

    Parameters mirror the training configuration; ``seed`` fixes weight
    initialization, shuffling, splitting, and augmentation, so two fits with
    identical inputs are bit-identical.
    """

    def __init__(self, max_epochs=50, batch_size=128, learning_rate=0.01,
                 momentum=0.9, validation_fraction=0.15, augment=True,
                 class_weight=None, seed=0):
        self.max_epochs = max_epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.validation_fraction = validation_fraction
        self.augment = augment
        self.class_weight = class_weight
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            max_epochs=self.max_epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            validation_fraction=self.validation_fraction,
            augment=self.augment,
            class_weight=self.class_weight,
            seed=self.seed,
        )

    def fit(self, X, y, groups=None):
        X = check_image_batch(X)
        y = np.asarray(y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        groups = check_groups(groups, len(X))
        net = build_tongue_net(class_count=max(len(self.classes_), 2), seed=self.seed)
        self.network_, self.training_log_ = train_network(
            net, X, y_idx, groups, self._config()
        )
        return self

    def warm_start_from(self, checkpoint_path, classes=None):
        """Load pretrained weights so a later ``fit`` fine-tunes them."""
        net, meta = load_checkpoint(checkpoint_path)
        self._pretrained_ = net
        self._pretrained_meta_ = meta
        if classes is not None:
            self._pretrained_classes_ = np.asarray(classes)
        return self

    def fine_tune_fit(self, X, y, groups=None):
        """Continue training from ``warm_start_from`` weights."""
        check_is_fitted(self, "_pretrained_")
        X = check_image_batch(X)
        y = np.asarray(y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        groups = check_groups(groups, len(X))
        self.network_, self.training_log_ = fine_tune(
            self._pretrained_, X, y_idx, groups, self._config()
        )
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "network_")
        X = check_image_batch(X)
        _, probs = predict(self.network_, X)
        return probs

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = check_image_batch(X)
        labels, _ = predict(self.network_, X)
        return self.classes_[labels]

    def save(self, path, metadata=None):
        check_is_fitted(self, "network_")
        meta = {"classes": [str(c) for c in self.classes_]}
        meta.update(metadata or {})
        save_checkpoint(self.network_, path, meta)

    @classmethod
    def load(cls, path) -> "TongueNetClassifier":
        net, meta = load_checkpoint(path)
        est = cls()
        est.network_ = net
        est.classes_ = np.asarray(meta.get("classes", list(range(net.class_count))))
        est.training_log_ = None
        return est


class FaceCropExtractor(TransformerMixin, BaseEstimator):
    """Stateless transformer: frames in, 32x32 face tensors out.

    ``transform`` takes a list of ``ImageBuffer`` and returns a float32
    (N, 3, 32, 32) batch. Frames without a detection are skipped and their
    indices recorded in ``skipped_``; with multiple detections the
    largest-area box wins (the recordings are single-subject).
    """

    def __init__(self, cascade: CascadeModel | None = None, scale_step: float = 1.1,
                 min_neighbors: int = 3):
        self.cascade = cascade
        self.scale_step = scale_step
        self.min_neighbors = min_neighbors

    def fit(self, X=None, y=None):
        self._check_cascade()
        return self

    def _check_cascade(self) -> None:
        if self.cascade is None:
            raise ValueError("FaceCropExtractor needs a parsed cascade model")

    def transform(self, frames: list[ImageBuffer]) -> np.ndarray:
        self._check_cascade()
        tensors, skipped = [], []
        for i, frame in enumerate(frames):
            boxes = detect_faces(frame, self.cascade, self.scale_step, self.min_neighbors)
            if not boxes:
                skipped.append(i)
                continue
            tensors.append(crop_resize(frame, boxes[0]).data[0])
        self.skipped_ = skipped
        if not tensors:
            return np.zeros((0, 3, 32, 32), dtype=np.float32)
        return np.stack(tensors)
