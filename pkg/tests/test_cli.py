"""End-to-end CLI tests, run in-process through main(argv)."""

import json

import numpy as np
import pytest

from gesture_forge.cli import EXIT_CONFIG, EXIT_DATA, EXIT_TRAINING, main
from gesture_forge.nn import layers as layer_mod
from gesture_forge.vision import ImageBuffer, encode_ppm


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main([
        "synth", "--out", str(out), "--seed", "3",
        "--children", "3", "--adults", "2",
        "--neutral", "12", "--tongue", "6", "--smiling", "3", "--mouth-opening", "3",
        "--adult-neutral", "6", "--adult-tongue", "4",
    ])
    assert code == 0
    return out


class TestSynth:
    def test_manifests_written(self, synth_dir):
        assert (synth_dir / "manifest_adults.json").exists()
        assert (synth_dir / "manifest_children.json").exists()
        doc = json.loads((synth_dir / "manifest_children.json").read_text())
        assert len(doc["participants"]) == 3

    def test_regeneration_is_byte_identical(self, synth_dir, tmp_path):
        again = tmp_path / "again"
        main([
            "synth", "--out", str(again), "--seed", "3",
            "--children", "3", "--adults", "2",
            "--neutral", "12", "--tongue", "6", "--smiling", "3", "--mouth-opening", "3",
            "--adult-neutral", "6", "--adult-tongue", "4",
        ])
        a = (synth_dir / "frames/C01/tongue_out/f0000.ppm").read_bytes()
        b = (again / "frames/C01/tongue_out/f0000.ppm").read_bytes()
        assert a == b


class TestLoso:
    def test_scenario2_writes_reports(self, synth_dir, tmp_path):
        out = tmp_path / "resu"
        code = main([
            "loso", "--scenario", "2",
            "--manifest-adults", str(synth_dir / "manifest_adults.json"),
            "--manifest-children", str(synth_dir / "manifest_children.json"),
            "--out", str(out), "--epochs", "1", "--batch-size", "32",
            "--lr", "0.02", "--seed", "5",
        ])
        assert code == 0
        assert (out / "report.md").exists()
        assert (out / "report.csv").exists()
        run = json.loads((out / "run.json").read_text())
        assert len(run["folds"]) == 3

    def test_same_seed_identical_artifacts(self, synth_dir, tmp_path):
        outs = []
        for name in ("one", "two"):
            out = tmp_path / name
            main([
                "loso", "--scenario", "2",
                "--manifest-adults", str(synth_dir / "manifest_adults.json"),
                "--manifest-children", str(synth_dir / "manifest_children.json"),
                "--out", str(out), "--epochs", "1", "--batch-size", "32",
                "--seed", "9",
            ])
            outs.append(out)
        for name in ("report.md", "report.csv", "run.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_unknown_scenario_is_config_error(self, synth_dir, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main([
                "loso", "--scenario", "5",
                "--manifest-adults", str(synth_dir / "manifest_adults.json"),
                "--manifest-children", str(synth_dir / "manifest_children.json"),
                "--out", str(tmp_path / "x"),
            ])
        assert exc.value.code == EXIT_CONFIG

    def test_missing_manifest_is_config_error(self, tmp_path):
        code = main([
            "loso", "--scenario", "2",
            "--manifest-adults", str(tmp_path / "absent.json"),
            "--manifest-children", str(tmp_path / "absent2.json"),
            "--out", str(tmp_path / "out"),
        ])
        assert code == EXIT_CONFIG


class TestTrainEvaluate:
    def test_train_then_evaluate(self, synth_dir, tmp_path):
        ckpt = tmp_path / "model.gfck"
        code = main([
            "train", "--manifest-children", str(synth_dir / "manifest_children.json"),
            "--out", str(ckpt), "--epochs", "1", "--batch-size", "32", "--seed", "2",
        ])
        assert code == 0 and ckpt.exists()

        metrics_file = tmp_path / "metrics.json"
        code = main([
            "evaluate", "--checkpoint", str(ckpt),
            "--manifest-children", str(synth_dir / "manifest_children.json"),
            "--out", str(metrics_file),
        ])
        assert code == 0
        doc = json.loads(metrics_file.read_text())
        assert doc["confusion"]["tp"] + doc["confusion"]["fn"] == 18  # 3 x 6 positives

    def test_evaluate_misc_class_grows_sample_count(self, synth_dir, tmp_path):
        ckpt = tmp_path / "model.gfck"
        main([
            "train", "--manifest-children", str(synth_dir / "manifest_children.json"),
            "--out", str(ckpt), "--epochs", "1", "--batch-size", "32",
        ])
        plain = tmp_path / "plain.json"
        misc = tmp_path / "misc.json"
        main(["evaluate", "--checkpoint", str(ckpt),
              "--manifest-children", str(synth_dir / "manifest_children.json"),
              "--out", str(plain)])
        main(["evaluate", "--checkpoint", str(ckpt),
              "--manifest-children", str(synth_dir / "manifest_children.json"),
              "--misc-class", "--out", str(misc)])
        n_plain = json.loads(plain.read_text())["samples"]
        n_misc = json.loads(misc.read_text())["samples"]
        assert n_misc == n_plain + 3 * 6  # smiling + mouth_opening per child

    def test_corrupted_checkpoint_is_data_error(self, synth_dir, tmp_path):
        bad = tmp_path / "bad.gfck"
        bad.write_bytes(b"GFCKgarbage")
        code = main([
            "evaluate", "--checkpoint", str(bad),
            "--manifest-children", str(synth_dir / "manifest_children.json"),
        ])
        assert code == EXIT_DATA

    @pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
    def test_divergent_training_is_training_error(self, synth_dir, tmp_path):
        code = main([
            "train", "--manifest-children", str(synth_dir / "manifest_children.json"),
            "--out", str(tmp_path / "x.gfck"), "--epochs", "2", "--batch-size", "32",
            "--lr", "1e30", "--no-augment",
        ])
        assert code == EXIT_TRAINING


class TestPreprocess:
    def test_report_counts(self, tmp_path, fixtures_dir, rng):
        frames = tmp_path / "frames"
        frames.mkdir()
        # Three noisy frames the pass-through cascade accepts, one flat frame
        # rejected by the zero-variance rule.
        for i in range(3):
            img = ImageBuffer(8, 8, rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
            (frames / f"f{i}.ppm").write_bytes(encode_ppm(img))
        flat = ImageBuffer(8, 8, np.zeros((8, 8, 3), dtype=np.uint8))
        (frames / "f3.ppm").write_bytes(encode_ppm(flat))

        out = tmp_path / "out"
        code = main([
            "preprocess", "--frames", str(frames),
            "--cascade", str(fixtures_dir / "minimal_cascade.xml"),
            "--out", str(out), "--min-neighbors", "1",
        ])
        assert code == 0
        report = json.loads((out / "preprocess_report.json").read_text())
        assert report == {"frames_total": 4, "faces_found": 3, "frames_skipped": 1}
        assert report["faces_found"] + report["frames_skipped"] == report["frames_total"]
        crops = list(out.glob("*_face.ppm"))
        assert len(crops) == 3

    def test_missing_cascade_is_config_error(self, tmp_path):
        code = main([
            "preprocess", "--frames", str(tmp_path),
            "--cascade", str(tmp_path / "missing.xml"), "--out", str(tmp_path / "o"),
        ])
        assert code == EXIT_CONFIG


class TestGradcheckCommand:
    def test_passes_by_default(self, capsys):
        assert main(["gradcheck", "--samples", "2"]) == 0
        out = capsys.readouterr().out
        for name in ("conv", "batchnorm", "relu", "maxpool", "fullyconnected",
                     "softmax", "network"):
            assert name in out

    def test_injected_sign_flip_fails(self, capsys):
        layer_mod._fault_injection.add("conv_input_grad_sign_flip")
        try:
            code = main(["gradcheck", "--samples", "2"])
        finally:
            layer_mod._fault_injection.discard("conv_input_grad_sign_flip")
        assert code == 1
        assert "FAIL" in capsys.readouterr().out
