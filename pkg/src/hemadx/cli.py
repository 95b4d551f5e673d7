"""Command-line entry point: scan, split, train, evaluate, compare, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error. Every
failure prints a single-line machine-parsable reason to stderr. Option
precedence is flag > HEMA_* environment variable > built-in default.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    CorpusLayoutError,
    DataError,
    DecodeError,
    HemadxError,
    InsufficientDataError,
    ManifestError,
    ModelNotFoundError,
)

_USAGE_EXIT = 1
_DATA_EXIT = 2
_RUNTIME_EXIT = 3

_DATA_ERRORS = (
    FileNotFoundError,
    CorpusLayoutError,
    ManifestError,
    DataError,
    InsufficientDataError,
    ModelNotFoundError,
    DecodeError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(_USAGE_EXIT)


def _env(name: str, fallback=None):
    return os.environ.get(f"HEMA_{name}", fallback)


def _ratios(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must be three comma-separated numbers, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"ratios must have three components, got {text!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hemadx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="discover the class-foldered corpus and report per-class counts")
    scan.add_argument("--data-root", default=_env("DATA_ROOT"), required=_env("DATA_ROOT") is None)

    split = sub.add_parser("split", help="create and save a stratified train/val/test manifest")
    split.add_argument("--data-root", default=_env("DATA_ROOT"), required=_env("DATA_ROOT") is None)
    split.add_argument("--manifest", default=_env("MANIFEST"), required=_env("MANIFEST") is None)
    split.add_argument("--ratios", type=_ratios, default=_ratios(_env("RATIOS", "0.70,0.15,0.15")))
    split.add_argument("--seed", type=int, default=int(_env("SEED", "42")))

    train = sub.add_parser("train", help="train one architecture (or all four) and register the results")
    train.add_argument(
        "--arch",
        choices=["convnet", "mobilenet", "resnet50", "vgg19", "all"],
        default=_env("ARCH", "all"),
    )
    train.add_argument("--manifest", default=_env("MANIFEST"), required=_env("MANIFEST") is None)
    train.add_argument("--registry", default=_env("REGISTRY"), required=_env("REGISTRY") is None)
    train.add_argument("--epochs", type=int, default=int(_env("EPOCHS", "30")))
    train.add_argument("--batch-size", type=int, default=int(_env("BATCH_SIZE", "32")))
    train.add_argument("--lr", type=float, default=float(_env("LR", "1e-3")))
    train.add_argument("--seed", type=int, default=int(_env("SEED", "42")))
    train.add_argument("--class-weights", action="store_true", help="weight the loss by inverse class frequency")
    train.add_argument(
        "--no-pretrained",
        action="store_true",
        help="random-initialize transfer backbones instead of loading ImageNet weights",
    )

    evaluate = sub.add_parser("evaluate", help="evaluate a registered model on a manifest split")
    evaluate.add_argument("--model-id", required=True)
    evaluate.add_argument("--registry", default=_env("REGISTRY"), required=_env("REGISTRY") is None)
    evaluate.add_argument("--manifest", default=_env("MANIFEST"), required=_env("MANIFEST") is None)
    evaluate.add_argument("--split", choices=["train", "val", "test"], default="test")
    evaluate.add_argument("--batch-size", type=int, default=int(_env("BATCH_SIZE", "32")))
    evaluate.add_argument("--out", default=None, help="also write the evaluation report JSON here")

    compare = sub.add_parser("compare", help="render the cross-model test comparison table")
    compare.add_argument("--registry", default=_env("REGISTRY"), required=_env("REGISTRY") is None)
    compare.add_argument("--out", default=None, help="CSV output path (default <registry>/comparison.csv)")

    serve = sub.add_parser("serve", help="run the telediagnosis HTTP service")
    serve.add_argument("--registry", default=_env("REGISTRY"), required=_env("REGISTRY") is None)
    serve.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    serve.add_argument("--port", type=int, default=int(_env("PORT", "8000")))
    serve.add_argument("--model-id", default=_env("MODEL_ID"))
    serve.add_argument("--static-dir", default=_env("STATIC_DIR"))

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        _report(exc)
        return _USAGE_EXIT
    except _DATA_ERRORS as exc:
        _report(exc)
        return _DATA_EXIT
    except HemadxError as exc:
        _report(exc)
        return _RUNTIME_EXIT
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 3
        _report(exc)
        return _RUNTIME_EXIT


def _report(exc: Exception) -> None:
    message = " ".join(str(exc).split())
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)


def _cmd_scan(args) -> int:
    from . import ingest

    records = ingest.scan_corpus(args.data_root)
    by_class: dict[str, int] = {}
    for record in records:
        by_class[record.label.folder_name] = by_class.get(record.label.folder_name, 0) + 1
    for name, count in sorted(by_class.items()):
        print(f"{name}\t{count}")
    print(f"total\t{len(records)}")
    return 0


def _cmd_split(args) -> int:
    from . import ingest

    records = ingest.scan_corpus(args.data_root)
    manifest = ingest.stratified_split(records, ratios=args.ratios, seed=args.seed)
    ingest.save_manifest(manifest, args.manifest)
    for split in ingest.SPLITS:
        print(f"{split}\t{len(manifest.records_for(split))}")
    print(f"manifest\t{args.manifest}")
    return 0


def _cmd_train(args) -> int:
    from . import evaluator, figures, ingest, pipeline, trainer, zoo
    from .registry import Registry

    manifest = ingest.load_manifest(args.manifest)
    config = trainer.TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        class_weighting=args.class_weights,
    )
    registry = Registry(args.registry)
    arch_names = zoo.ARCH_ORDER if args.arch == "all" else (args.arch,)

    for arch in arch_names:
        trainer.seed_everything(config.seed)  # before build: init weights replay too
        graph = zoo.build_model(arch, pretrained=not args.no_pretrained)
        train_stream = pipeline.make_train_stream(manifest, batch_size=config.batch_size, seed=config.seed)
        val_stream = pipeline.make_eval_stream(manifest, "val", batch_size=config.batch_size)
        trained = trainer.train(graph, train_stream, val_stream, config)

        test_stream = pipeline.make_eval_stream(manifest, "test", batch_size=config.batch_size)
        metrics = evaluator.evaluate(trained.model, test_stream)
        report = evaluator.EvaluationReport(arch_name=arch, model_id="", splits={"test": metrics})
        model_id = registry.save_artifact(trained, report)
        figures.save_history_figures(trained.history, Path(args.registry) / "figures", arch)
        print(
            f"{arch}\tmodel_id={model_id}\tval_accuracy={trained.best_val_accuracy:.4f}\t"
            f"test_accuracy={metrics.accuracy:.4f}\ttest_loss={metrics.loss:.4f}"
        )
    return 0


def _cmd_evaluate(args) -> int:
    from . import evaluator, ingest, pipeline
    from .registry import Registry

    registry = Registry(args.registry)
    graph, meta = registry.load_artifact(args.model_id)
    manifest = ingest.load_manifest(args.manifest)
    stream = pipeline.make_eval_stream(manifest, args.split, batch_size=args.batch_size)
    metrics = evaluator.evaluate(graph, stream)

    print(f"model_id\t{meta.model_id}")
    print(f"arch\t{meta.arch_name}")
    print(f"split\t{args.split}")
    print(f"accuracy\t{metrics.accuracy:.4f}")
    print(f"loss\t{metrics.loss:.4f}")
    print("confusion\t" + "; ".join(" ".join(str(v) for v in row) for row in metrics.confusion))

    existing = registry.report_for(meta.model_id)
    splits = dict(existing.splits) if existing else {}
    splits[args.split] = metrics
    if "test" in splits:
        report = evaluator.EvaluationReport(arch_name=meta.arch_name, model_id=meta.model_id, splits=splits)
        reports_dir = registry.root / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        evaluator.write_report_json(report, reports_dir / f"{meta.model_id}.json")
        if args.out:
            evaluator.write_report_json(report, args.out)
    return 0


def _cmd_compare(args) -> int:
    from . import evaluator, figures
    from .registry import Registry

    registry = Registry(args.registry)
    metas = registry.list_artifacts()
    reports = [report for meta in metas if (report := registry.report_for(meta.model_id)) is not None]
    if not reports:
        raise DataError(f"registry {args.registry} has no evaluation reports; run train or evaluate first")
    table = evaluator.comparison_table(reports)
    out = Path(args.out) if args.out else registry.root / "comparison.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    table.write_csv(out)
    figures.save_comparison_figure(table, registry.root / "figures" / "comparison.png")
    print(table.text(), end="")
    print(f"csv\t{out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.registry, model_id=args.model_id, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "scan": _cmd_scan,
    "split": _cmd_split,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "serve": _cmd_serve,
}


if __name__ == "__main__":
    raise SystemExit(main())
