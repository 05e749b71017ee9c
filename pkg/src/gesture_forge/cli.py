"""Command-line entry point for the whole pipeline.

Subcommands: synth, preprocess, train, evaluate, loso, gradcheck, serve.
Exit codes: 0 success, 2 configuration problem, 3 data problem, 4 training
failure. The GESTURE_FORGE_LOG environment variable (error|warn|info|debug)
controls log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import errors
from .checkpoint import load_checkpoint, save_checkpoint
from .data.manifest import load_manifest
from .data.synthetic import generate_dataset
from .experiments.metrics import ConfusionCounts, compute_metrics
from .experiments.report import emit_csv, emit_markdown, emit_run_record
from .experiments.runner import SampleLoader, run_scenario
from .nn import (
    BatchNorm2d,
    Conv2d,
    Linear,
    MaxPool2d,
    ReLU,
    build_tongue_net,
    check_layer,
    check_network,
    check_softmax_cross_entropy,
)
from .training import TrainConfig, predict, train_network
from .vision.cascade import parse_cascade_xml, detect_faces
from .vision.image import decode_image, encode_ppm, ImageBuffer
from .vision.transform import crop_resize

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4

GRADCHECK_THRESHOLD = 1e-3

DATA_ERRORS = (
    errors.ManifestError,
    errors.DatasetError,
    errors.AnnotationError,
    errors.SplitError,
    errors.LeakageError,
    errors.ImageFormatError,
    errors.CascadeFormatError,
    errors.CascadeModelError,
    errors.CheckpointError,
    errors.EmptyEvaluationError,
)
TRAINING_ERRORS = (errors.DivergenceError, errors.TransferError)


def setup_logging() -> None:
    level_name = os.environ.get("GESTURE_FORGE_LOG", "warn").lower()
    level = {"error": logging.ERROR, "warn": logging.WARNING,
             "info": logging.INFO, "debug": logging.DEBUG}.get(level_name)
    if level is None:
        print(f"GESTURE_FORGE_LOG must be error|warn|info|debug, got {level_name!r}",
              file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def require_paths(*paths: tuple[str, Path]) -> None:
    missing = [f"{flag}: {p}" for flag, p in paths if not Path(p).exists()]
    if missing:
        raise ConfigError("missing input path(s): " + "; ".join(missing))


class ConfigError(Exception):
    pass


def add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--batch-size", type=int, default=128)
    parser.add_argument("--lr", type=float, default=0.01)
    parser.add_argument("--momentum", type=float, default=0.9)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--validation-fraction", type=float, default=0.15)
    parser.add_argument("--no-augment", action="store_true",
                        help="disable scale/rotation augmentation")


def train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        max_epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        momentum=args.momentum,
        seed=args.seed,
        validation_fraction=args.validation_fraction,
        augment=not args.no_augment,
    )


# --- subcommands ----------------------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    child_counts = {"neutral": args.neutral, "tongue_out": args.tongue,
                    "smiling": args.smiling, "mouth_opening": args.mouth_opening}
    adult_counts = {"neutral": args.adult_neutral, "tongue_out": args.adult_tongue}
    adults_path, children_path = generate_dataset(
        out, seed=args.seed, children=args.children, adults=args.adults,
        child_counts=child_counts, adult_counts=adult_counts,
    )
    print(adults_path)
    print(children_path)
    return EXIT_OK


def cmd_preprocess(args) -> int:
    require_paths(("--frames", args.frames), ("--cascade", args.cascade))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cascade = parse_cascade_xml(Path(args.cascade).read_text(encoding="utf-8"))

    frame_paths = sorted(
        p for p in Path(args.frames).iterdir()
        if p.suffix.lower() in (".ppm", ".bmp")
    )
    found, skipped = 0, 0
    for path in frame_paths:
        img = decode_image(path.read_bytes())
        boxes = detect_faces(img, cascade, scale_step=args.scale_step,
                             min_neighbors=args.min_neighbors)
        if not boxes:
            skipped += 1
            log.info("no face in %s; skipped", path.name)
            continue
        tensor = crop_resize(img, boxes[0])
        pixels = np.clip(np.rint(tensor.data[0] * 255.0), 0, 255).astype(np.uint8)
        crop = ImageBuffer(32, 32, pixels.transpose(1, 2, 0).copy())
        (out / f"{path.stem}_face.ppm").write_bytes(encode_ppm(crop))
        found += 1

    report = {"frames_total": len(frame_paths), "faces_found": found,
              "frames_skipped": skipped}
    (out / "preprocess_report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return EXIT_OK


def _load_manifests(args, need_adults: bool, need_children: bool):
    adults = children = None
    if need_adults:
        require_paths(("--manifest-adults", args.manifest_adults))
        adults = load_manifest(args.manifest_adults)
    if need_children:
        require_paths(("--manifest-children", args.manifest_children))
        children = load_manifest(args.manifest_children)
    return adults, children


def cmd_train(args) -> int:
    manifests = []
    if args.manifest_adults:
        manifests.append(load_manifest(args.manifest_adults))
    if args.manifest_children:
        manifests.append(load_manifest(args.manifest_children))
    if not manifests:
        raise ConfigError("provide --manifest-adults and/or --manifest-children")

    loader = SampleLoader()
    samples = [s for m in manifests for s in m.samples()]
    X, y, groups = loader.load_all(samples)
    config = train_config(args)
    net = build_tongue_net(seed=config.seed)
    net, train_log = train_network(net, X, y, groups, config)
    save_checkpoint(net, args.out, {
        "config": config.to_dict(),
        "epochs_run": len(train_log.epochs),
        "best_epoch": train_log.best_epoch,
        "best_val_loss": train_log.best_val_loss,
        "seed": config.seed,
        "train_size": train_log.train_size,
        "val_size": train_log.val_size,
    })
    print(f"saved checkpoint to {args.out} "
          f"(best epoch {train_log.best_epoch}, val loss {train_log.best_val_loss:.4f})")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    require_paths(("--checkpoint", args.checkpoint))
    _, children = _load_manifests(args, need_adults=False, need_children=True)
    net, _ = load_checkpoint(args.checkpoint)
    loader = SampleLoader()
    samples = children.samples()
    if args.misc_class:
        from .data.splits import add_misc_class

        samples = add_misc_class(samples, children)
    X, y, _ = loader.load_all(samples)
    y_pred, _ = predict(net, X)
    counts = ConfusionCounts.from_predictions(y, y_pred)
    metrics = compute_metrics(counts)
    doc = {"confusion": {"tp": counts.tp, "fp": counts.fp,
                         "tn": counts.tn, "fn": counts.fn},
           "metrics": metrics.as_dict(), "samples": counts.total}
    output = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(output)
    print(output, end="")
    return EXIT_OK


def cmd_loso(args) -> int:
    adults, children = _load_manifests(args, need_adults=True, need_children=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_scenario(args.scenario, adults, children, train_config(args),
                          misc_class=args.misc_class, loader=SampleLoader())
    emit_markdown(report, out / "report.md")
    emit_csv(report, out / "report.csv")
    emit_run_record(report, out / "run.json")
    agg = report.aggregates.get("accuracy")
    print(f"scenario {args.scenario}: "
          + (f"accuracy {agg[0]:.3f}±{agg[1]:.3f}" if agg else "accuracy n/a")
          + f" over {len(report.folds)} folds -> {out}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    dtype = np.float32 if args.dtype == "float32" else np.float64
    rng = np.random.default_rng(args.seed)
    checks: list[tuple[str, object]] = []

    conv = Conv2d(3, 8, np.random.default_rng(args.seed), name="conv")
    checks.append(("conv 3x3 (3->8)",
                   check_layer(conv, rng.standard_normal((2, 3, 10, 10)),
                               epsilon=args.epsilon, dtype=dtype, seed=args.seed)))
    bn = BatchNorm2d(4)
    checks.append(("batchnorm (4ch)",
                   check_layer(bn, rng.standard_normal((3, 4, 6, 6)),
                               epsilon=args.epsilon, dtype=dtype, seed=args.seed)))
    relu_x = rng.standard_normal((2, 3, 8, 8))
    relu_x[np.abs(relu_x) < 0.05] = 0.5  # probe away from the kink
    checks.append(("relu",
                   check_layer(ReLU(), relu_x, epsilon=args.epsilon, dtype=dtype,
                               seed=args.seed)))
    pool_x = rng.permutation(2 * 2 * 8 * 8).astype(np.float64).reshape(2, 2, 8, 8)
    checks.append(("maxpool 2x2/s2",
                   check_layer(MaxPool2d(), pool_x, epsilon=args.epsilon,
                               dtype=dtype, seed=args.seed)))
    fc = Linear(24, 5, np.random.default_rng(args.seed), name="fc")
    checks.append(("fullyconnected (24->5)",
                   check_layer(fc, rng.standard_normal((4, 24)),
                               epsilon=args.epsilon, dtype=dtype, seed=args.seed)))
    checks.append(("softmax-crossentropy",
                   check_softmax_cross_entropy(epsilon=args.epsilon, dtype=dtype,
                                               seed=args.seed)))

    net = build_tongue_net(seed=args.seed)
    x = rng.standard_normal((4, 3, 32, 32)).astype(np.float32)
    labels = rng.integers(0, 2, 4)
    checks.append(("network (composed)",
                   check_network(net, x, labels, epsilon=args.epsilon, dtype=dtype,
                                 samples_per_target=args.samples, seed=args.seed)))

    worst = 0.0
    for name, report in checks:
        err = report.max_relative_error
        worst = max(worst, err)
        status = "PASS" if err <= GRADCHECK_THRESHOLD else "FAIL"
        print(f"{name:26s} max rel err {err:.3e}  {status}")
    overall = "PASS" if worst <= GRADCHECK_THRESHOLD else "FAIL"
    print(f"{'overall':26s} max rel err {worst:.3e}  "
          f"(threshold {GRADCHECK_THRESHOLD:.0e})  {overall}")
    return EXIT_OK if worst <= GRADCHECK_THRESHOLD else 1


def cmd_serve(args) -> int:
    require_paths(("--video-root", args.video_root),
                  ("--annotation-root", args.annotation_root))
    import uvicorn

    from .service import create_app

    app = create_app(args.video_root, args.annotation_root, args.ui_root)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# --- argument wiring --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesture-forge",
        description="Tongue-out gesture detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic fixture cohorts")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--children", type=int, default=5)
    p.add_argument("--adults", type=int, default=17)
    p.add_argument("--neutral", type=int, default=60)
    p.add_argument("--tongue", type=int, default=20)
    p.add_argument("--smiling", type=int, default=10)
    p.add_argument("--mouth-opening", type=int, default=10)
    p.add_argument("--adult-neutral", type=int, default=20)
    p.add_argument("--adult-tongue", type=int, default=15)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="detect faces and crop frames to 32x32")
    p.add_argument("--frames", required=True)
    p.add_argument("--cascade", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale-step", type=float, default=1.1)
    p.add_argument("--min-neighbors", type=int, default=3)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train on manifest samples, save a checkpoint")
    p.add_argument("--manifest-adults")
    p.add_argument("--manifest-children")
    p.add_argument("--out", required=True)
    add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a manifest")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest-children", required=True)
    p.add_argument("--misc-class", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("loso", help="run a scenario across all LOSO folds")
    p.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--manifest-adults", required=True)
    p.add_argument("--manifest-children", required=True)
    p.add_argument("--misc-class", action="store_true")
    p.add_argument("--out", required=True)
    add_train_flags(p)
    p.set_defaults(func=cmd_loso)

    p = sub.add_parser("gradcheck", help="finite-difference check of every layer")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--dtype", choices=("float32", "float64"), default="float64")
    p.add_argument("--samples", type=int, default=6,
                   help="sampled coordinates per tensor for the composed network")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--video-root", required=True)
    p.add_argument("--annotation-root", required=True)
    p.add_argument("--ui-root")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TRAINING_ERRORS as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())
