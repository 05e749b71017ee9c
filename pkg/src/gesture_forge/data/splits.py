"""Leave-one-subject-out folds and the four training-scenario set builders.

Scenario sets (fold = one held-out child):

1. train on every adult, test on the fold's child;
2. train on the other children, test on the fold's child;
3. train on every adult plus the other children, test on the fold's child;
4. pretrain on every adult, fine-tune on the other children, test on the
   fold's child.

The held-out child's samples never enter a training or validation portion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..errors import LeakageError, SplitError
from .manifest import PRIMARY_CLASSES, DatasetManifest, Sample

log = logging.getLogger(__name__)

SCENARIOS = (1, 2, 3, 4)
MISC_CLASSES = ("smiling", "mouth_opening")


@dataclass(frozen=True)
class Fold:
    fold_id: int
    train_participants: tuple[str, ...]
    test_participants: tuple[str, ...]

    def __post_init__(self):
        overlap = set(self.train_participants) & set(self.test_participants)
        if overlap:
            raise LeakageError(f"participants in both train and test: {sorted(overlap)}")


def loso_splits(manifest: DatasetManifest, cohort: str = "child") -> list[Fold]:
    """One fold per participant of the cohort, each held out exactly once."""
    ids = sorted(manifest.participant_ids(cohort))
    if len(ids) < 2:
        raise SplitError(
            f"leave-one-subject-out needs >= 2 {cohort} participants, got {len(ids)}"
        )
    return [
        Fold(fold_id=i,
             train_participants=tuple(p for p in ids if p != pid),
             test_participants=(pid,))
        for i, pid in enumerate(ids)
    ]


@dataclass
class ScenarioSets:
    scenario: int
    train: list[Sample]
    test: list[Sample]
    pretrain: list[Sample] | None = None


def _assert_no_leakage(sets: ScenarioSets) -> None:
    test_ids = {s.participant_id for s in sets.test}
    for portion in (sets.train, sets.pretrain or []):
        leaked = test_ids & {s.participant_id for s in portion}
        if leaked:
            raise LeakageError(f"test participants leaked into training: {sorted(leaked)}")


def build_scenario(scenario: int, fold: Fold, adults: DatasetManifest,
                   children: DatasetManifest) -> ScenarioSets:
    """Materialize the train/test (and scenario-4 pretrain) sample lists."""
    if scenario not in SCENARIOS:
        raise SplitError(f"unknown scenario {scenario}, expected one of {SCENARIOS}")
    child_ids = set(children.participant_ids("child"))
    if not set(fold.test_participants) <= child_ids:
        raise LeakageError(
            f"fold test participants {fold.test_participants} are not children"
        )

    test = children.samples(fold.test_participants, PRIMARY_CLASSES)
    other_children = children.samples(fold.train_participants, PRIMARY_CLASSES)
    all_adults = adults.samples(adults.participant_ids("adult"), PRIMARY_CLASSES)

    if scenario == 1:
        sets = ScenarioSets(scenario, train=all_adults, test=test)
    elif scenario == 2:
        sets = ScenarioSets(scenario, train=other_children, test=test)
    elif scenario == 3:
        sets = ScenarioSets(scenario, train=all_adults + other_children, test=test)
    else:
        sets = ScenarioSets(scenario, train=other_children, test=test,
                            pretrain=all_adults)
    _assert_no_leakage(sets)
    return sets


def add_misc_class(test_samples: list[Sample], children: DatasetManifest) -> list[Sample]:
    """Append the test participants' smiling and mouth-opening frames as extra
    negatives; the positives and any training set are untouched."""
    test_ids = sorted({s.participant_id for s in test_samples})
    extra = [
        s
        for pid in test_ids
        for s in children.participant(pid).samples(MISC_CLASSES)
    ]
    if not extra:
        log.warning("misc-class requested but %s have no smiling/mouth-opening frames",
                    test_ids)
    return list(test_samples) + extra
