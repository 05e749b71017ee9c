"""gesture-forge: tongue-out gesture detection, end to end.

Face detection and cropping, a small CNN trained from scratch with
SGD-momentum, leave-one-subject-out evaluation across four training
scenarios, and a browser-based annotation workflow for ground truth.
"""

from .estimators import FaceCropExtractor, TongueNetClassifier
from .checkpoint import load_checkpoint, save_checkpoint
from .training import TrainConfig, TrainingLog, fine_tune, predict, train_network

__version__ = "0.1.0"

__all__ = [
    "FaceCropExtractor",
    "TongueNetClassifier",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "TrainingLog",
    "fine_tune",
    "predict",
    "train_network",
    "__version__",
]
