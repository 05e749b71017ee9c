"""Scenario runner and report emission tests on a miniature synthetic set."""

import csv
import json

import numpy as np
import pytest

from gesture_forge.data import generate_dataset, load_manifest
from gesture_forge.experiments import (
    ConfusionCounts,
    FoldResult,
    MetricSet,
    SampleLoader,
    ScenarioReport,
    aggregate,
    run_scenario,
)
from gesture_forge.experiments.report import (
    emit_csv,
    emit_markdown,
    emit_report,
    emit_run_record,
)
from gesture_forge.training import TrainConfig

TINY_CHILD = {"neutral": 16, "tongue_out": 8, "smiling": 4, "mouth_opening": 4}
TINY_ADULT = {"neutral": 8, "tongue_out": 6}
TINY_CONFIG = TrainConfig(max_epochs=1, batch_size=32, learning_rate=0.02, seed=7)


@pytest.fixture(scope="module")
def tiny_world(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny")
    adults_path, children_path = generate_dataset(
        root, seed=5, children=3, adults=2,
        child_counts=TINY_CHILD, adult_counts=TINY_ADULT,
    )
    return load_manifest(adults_path), load_manifest(children_path)


@pytest.fixture(scope="module")
def tiny_report(tiny_world):
    adults, children = tiny_world
    return run_scenario(2, adults, children, TINY_CONFIG, loader=SampleLoader())


class TestRunScenario:
    def test_one_fold_per_child_plus_aggregate(self, tiny_report):
        assert len(tiny_report.folds) == 3
        assert set(tiny_report.aggregates) == {
            "accuracy", "specificity", "sensitivity", "f1", "precision"
        }

    def test_confusion_totals_match_test_size(self, tiny_report):
        for fold in tiny_report.folds:
            assert fold.confusion.total == fold.test_size

    def test_aggregate_recomputable_from_folds(self, tiny_report):
        recomputed = aggregate([f.metrics for f in tiny_report.folds])
        assert recomputed == tiny_report.aggregates

    def test_misc_class_grows_negatives_only(self, tiny_world):
        adults, children = tiny_world
        loader = SampleLoader()
        plain = run_scenario(2, adults, children, TINY_CONFIG, loader=loader)
        misc = run_scenario(2, adults, children, TINY_CONFIG, misc_class=True,
                            loader=loader)
        for p, m in zip(plain.folds, misc.folds):
            assert m.test_size == p.test_size + 8
            assert m.confusion.tp + m.confusion.fn == p.confusion.tp + p.confusion.fn

    def test_seeded_rerun_identical(self, tiny_world, tiny_report, tmp_path):
        adults, children = tiny_world
        again = run_scenario(2, adults, children, TINY_CONFIG, loader=SampleLoader())
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        emit_run_record(tiny_report, a)
        emit_run_record(again, b)
        assert a.read_bytes() == b.read_bytes()

    def test_scenario4_reports_pretrain_free_folds(self, tiny_world):
        adults, children = tiny_world
        report = run_scenario(4, adults, children, TINY_CONFIG, loader=SampleLoader())
        assert len(report.folds) == 3
        child_ids = set(children.participant_ids())
        for fold in report.folds:
            assert set(fold.test_participants) <= child_ids


def c04_style_report():
    metrics = MetricSet(accuracy=0.99, specificity=1.00, sensitivity=0.83,
                        precision=0.94, f1=0.88)
    fold = FoldResult(
        fold_id=0, test_participants=("C04",),
        confusion=ConfusionCounts(tp=5, fp=0, tn=94, fn=1),
        metrics=metrics, train_size=100, test_size=100, best_epoch=3,
    )
    return ScenarioReport(
        scenario=2, misc_class=True, config={"seed": 0},
        config_fingerprint="deadbeef00000000",
        folds=[fold], aggregates=aggregate([metrics]),
    )


class TestReportEmission:
    def test_markdown_row_matches_published_column_order(self, tmp_path):
        path = tmp_path / "report.md"
        emit_markdown(c04_style_report(), path)
        text = path.read_text()
        header = next(l for l in text.splitlines() if l.startswith("| Participant"))
        assert header == ("| Participant | Accuracy | Specificity | Sensitivity "
                          "| F1-Score | Precision |")
        row = next(l for l in text.splitlines() if l.startswith("| C04"))
        assert row == "| C04 | 0.99 | 1.00 | 0.83 | 0.88 | 0.94 |"

    def test_markdown_aggregate_row_uses_plus_minus(self, tmp_path):
        path = tmp_path / "report.md"
        emit_markdown(c04_style_report(), path)
        agg_row = path.read_text().splitlines()[-1]
        assert "±" in agg_row
        assert "0.99±0.00" in agg_row

    def test_emission_is_byte_deterministic(self, tiny_report, tmp_path):
        pairs = []
        for fmt, name in (("markdown", "r.md"), ("csv", "r.csv"), ("json", "r.json")):
            a, b = tmp_path / f"a_{name}", tmp_path / f"b_{name}"
            emit_report(tiny_report, fmt, a)
            emit_report(tiny_report, fmt, b)
            pairs.append((a.read_bytes(), b.read_bytes()))
        assert all(x == y for x, y in pairs)

    def test_csv_reparse_matches_aggregates(self, tiny_report, tmp_path):
        path = tmp_path / "report.csv"
        emit_csv(tiny_report, path)
        rows = list(csv.DictReader(path.read_text().splitlines()))
        fold_rows = [r for r in rows if r["fold_id"] not in ("mean", "std")]
        mean_row = next(r for r in rows if r["fold_id"] == "mean")
        std_row = next(r for r in rows if r["fold_id"] == "std")
        for metric in ("accuracy", "specificity", "sensitivity", "f1", "precision"):
            values = [float(r[metric]) for r in fold_rows if r[metric] != ""]
            if not values:
                assert mean_row[metric] == ""
                continue
            assert abs(np.mean(values) - float(mean_row[metric])) < 1e-9
            expected_std = np.std(values, ddof=1) if len(values) > 1 else 0.0
            assert abs(expected_std - float(std_row[metric])) < 1e-9

    def test_csv_values_full_precision(self, tiny_report, tmp_path):
        path = tmp_path / "report.csv"
        emit_csv(tiny_report, path)
        rows = list(csv.DictReader(path.read_text().splitlines()))
        first = rows[0]
        fold = tiny_report.folds[0]
        if first["accuracy"]:
            assert float(first["accuracy"]) == fold.metrics.accuracy

    def test_run_record_round_trip(self, tiny_report, tmp_path):
        path = tmp_path / "run.json"
        emit_run_record(tiny_report, path)
        doc = json.loads(path.read_text())
        assert doc["scenario"] == 2
        assert len(doc["folds"]) == 3
        assert doc["config_fingerprint"] == tiny_report.config_fingerprint
        for fold_doc, fold in zip(doc["folds"], tiny_report.folds):
            assert fold_doc["confusion"]["tp"] == fold.confusion.tp

    def test_unknown_format_rejected(self, tiny_report, tmp_path):
        with pytest.raises(ValueError):
            emit_report(tiny_report, "yaml", tmp_path / "r.yaml")
