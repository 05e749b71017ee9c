"""Orchestrates the four training scenarios over every LOSO fold.

Fold independence: each fold trains with ``seed = base_seed + fold_id`` so a
serial sweep and any parallel execution produce identical reports. The
scenario-1 adult model and the scenario-4 pretrained model depend only on
the adult cohort, so they are trained once per run (with the base seed) and
shared across folds.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..data.manifest import DatasetManifest, Sample, label_to_target
from ..data.splits import add_misc_class, build_scenario, loso_splits
from ..nn import Network, build_tongue_net
from ..training import TrainConfig, fine_tune, predict, train_network
from ..vision.cascade import BoundingBox
from ..vision.image import decode_image
from ..vision.transform import NET_SIZE, crop_resize
from .metrics import ConfusionCounts, MetricSet, aggregate, compute_metrics

log = logging.getLogger(__name__)


class SampleLoader:
    """Decode sample frames into network tensors, with a per-path cache.

    Frames that are already network resolution load directly; anything else
    is treated as a pre-cropped face region and bilinearly resized.
    """

    def __init__(self):
        self._cache: dict[Path, np.ndarray] = {}

    def load(self, sample: Sample) -> np.ndarray:
        cached = self._cache.get(sample.path)
        if cached is None:
            img = decode_image(sample.path.read_bytes())
            if (img.width, img.height) == (NET_SIZE, NET_SIZE):
                cached = img.pixels.transpose(2, 0, 1).astype(np.float32) / 255.0
            else:
                box = BoundingBox(0, 0, img.width, img.height)
                cached = crop_resize(img, box).data[0]
            self._cache[sample.path] = cached
        return cached

    def load_all(self, samples: list[Sample]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(X, binary targets, participant groups) for a sample list."""
        X = np.stack([self.load(s) for s in samples])
        y = np.array([label_to_target(s.label) for s in samples], dtype=np.int64)
        groups = np.array([s.participant_id for s in samples])
        return X, y, groups


@dataclass(frozen=True)
class FoldResult:
    fold_id: int
    test_participants: tuple[str, ...]
    confusion: ConfusionCounts
    metrics: MetricSet
    train_size: int
    test_size: int
    best_epoch: int


@dataclass
class ScenarioReport:
    scenario: int
    misc_class: bool
    config: dict
    config_fingerprint: str
    folds: list[FoldResult] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)


def config_fingerprint(scenario: int, misc_class: bool, config: TrainConfig,
                       adults: DatasetManifest, children: DatasetManifest) -> str:
    doc = {
        "scenario": scenario,
        "misc_class": misc_class,
        "config": config.to_dict(),
        "adults": sorted(adults.participant_ids()),
        "children": sorted(children.participant_ids()),
    }
    blob = json.dumps(doc, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _evaluate_fold(net: Network, loader: SampleLoader, test_samples: list[Sample]):
    X, y, _ = loader.load_all(test_samples)
    y_pred, _ = predict(net, X)
    confusion = ConfusionCounts.from_predictions(y, y_pred)
    return confusion, compute_metrics(confusion)


def run_scenario(
    scenario: int,
    adults: DatasetManifest,
    children: DatasetManifest,
    config: TrainConfig | None = None,
    misc_class: bool = False,
    loader: SampleLoader | None = None,
) -> ScenarioReport:
    config = config or TrainConfig()
    loader = loader or SampleLoader()
    folds = loso_splits(children)

    report = ScenarioReport(
        scenario=scenario,
        misc_class=misc_class,
        config=config.to_dict(),
        config_fingerprint=config_fingerprint(scenario, misc_class, config,
                                              adults, children),
    )

    shared_net: Network | None = None
    if scenario in (1, 4):
        # Both depend only on the adult cohort; train once and share.
        pre_sets = build_scenario(scenario, folds[0], adults, children)
        samples = pre_sets.train if scenario == 1 else pre_sets.pretrain
        X, y, groups = loader.load_all(samples)
        net = build_tongue_net(seed=config.seed)
        log.info("scenario %d: training shared adult model on %d samples",
                 scenario, len(X))
        shared_net, shared_log = train_network(net, X, y, groups, config)

    for fold in folds:
        fold_config = replace(config, seed=config.seed + fold.fold_id)
        try:
            sets = build_scenario(scenario, fold, adults, children)
            test_samples = add_misc_class(sets.test, children) if misc_class else sets.test

            if scenario == 1:
                net, train_log, train_size = shared_net, shared_log, len(sets.train)
            elif scenario == 4:
                X, y, groups = loader.load_all(sets.train)
                net, train_log = fine_tune(shared_net, X, y, groups, fold_config)
                train_size = len(sets.train)
            else:
                X, y, groups = loader.load_all(sets.train)
                fresh = build_tongue_net(seed=fold_config.seed)
                net, train_log = train_network(fresh, X, y, groups, fold_config)
                train_size = len(sets.train)

            confusion, metric_set = _evaluate_fold(net, loader, test_samples)
        except Exception as exc:
            exc.args = (f"fold {fold.fold_id} ({'/'.join(fold.test_participants)}): "
                        f"{exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
        report.folds.append(
            FoldResult(
                fold_id=fold.fold_id,
                test_participants=fold.test_participants,
                confusion=confusion,
                metrics=metric_set,
                train_size=train_size,
                test_size=len(test_samples),
                best_epoch=train_log.best_epoch,
            )
        )
        log.info("scenario %d fold %d (%s): accuracy=%s", scenario, fold.fold_id,
                 fold.test_participants[0],
                 f"{metric_set.accuracy:.3f}" if metric_set.accuracy is not None else "n/a")

    report.aggregates = aggregate([f.metrics for f in report.folds])
    return report
