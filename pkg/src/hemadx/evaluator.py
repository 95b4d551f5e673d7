"""Test-set metrics, cross-model comparison tables, and curve export.

Predictions are the argmax of the 4-way softmax output; argmax ties resolve
to the lowest class index. Loss is the mean over records of -log(probability
assigned to the true class), with probabilities floored at 1e-7 before the
log so a hard-zero prediction yields a large finite loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .labels import NUM_CLASSES
from .pipeline import EvalStream
from .trainer import TrainingHistory, write_history_csv
from .zoo import ModelGraph

_PROB_FLOOR = 1e-7

COMPARISON_CSV_HEADER = "model,test_accuracy,test_loss"


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    loss: float
    confusion: tuple[tuple[int, ...], ...]  # rows = true class, cols = predicted

    def __post_init__(self) -> None:
        matrix = np.asarray(self.confusion)
        if matrix.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ValueError(f"confusion must be {NUM_CLASSES}x{NUM_CLASSES}, got {matrix.shape}")
        total = int(matrix.sum())
        if total == 0:
            raise ValueError("confusion matrix is empty")
        if abs(self.accuracy - np.trace(matrix) / total) > 1e-9:
            raise ValueError("accuracy does not equal trace(confusion) / sum(confusion)")
        if self.loss < 0:
            raise ValueError("loss must be >= 0")

    @property
    def record_count(self) -> int:
        return int(np.asarray(self.confusion).sum())


@dataclass(frozen=True)
class EvaluationReport:
    arch_name: str
    model_id: str
    splits: dict[str, Metrics] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if "test" not in self.splits:
            raise ValueError("evaluation report requires test metrics")

    @property
    def test(self) -> Metrics:
        return self.splits["test"]


def evaluate(graph: ModelGraph, stream: EvalStream) -> Metrics:
    """Deterministic accuracy / loss / confusion over an augmentation-free stream."""
    confusion = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    loss_sum = 0.0
    seen = 0
    for x, y in stream:
        probabilities = graph.forward(x)
        true_ids = np.argmax(y, axis=1)
        predicted = np.argmax(probabilities, axis=1)
        np.add.at(confusion, (true_ids, predicted), 1)
        p_true = probabilities[np.arange(len(x)), true_ids]
        loss_sum += float(-np.log(np.clip(p_true, _PROB_FLOOR, 1.0)).sum())
        seen += len(x)
    if seen == 0:
        raise ValueError("evaluation stream yielded no records")
    return Metrics(
        accuracy=float(np.trace(confusion)) / seen,
        loss=loss_sum / seen,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
    )


@dataclass(frozen=True)
class ComparisonTable:
    """Per-model test accuracy and loss, best first."""

    rows: tuple[tuple[str, float, float], ...]

    def csv_text(self) -> str:
        lines = [COMPARISON_CSV_HEADER]
        lines.extend(f"{name},{accuracy!r},{loss!r}" for name, accuracy, loss in self.rows)
        return "\n".join(lines) + "\n"

    def text(self) -> str:
        width = max([len("model")] + [len(name) for name, _, _ in self.rows])
        lines = [f"{'model':<{width}}  accuracy  loss"]
        lines.extend(f"{name:<{width}}  {accuracy:>8.4f}  {loss:.4f}" for name, accuracy, loss in self.rows)
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.csv_text(), encoding="utf-8")


def comparison_table(reports: list[EvaluationReport]) -> ComparisonTable:
    """Rank reports by descending test accuracy (ties: ascending loss, name)."""
    if not reports:
        raise ValueError("comparison_table requires at least one report")
    ordered = sorted(reports, key=lambda r: (-r.test.accuracy, r.test.loss, r.arch_name))
    return ComparisonTable(rows=tuple((r.arch_name, r.test.accuracy, r.test.loss) for r in ordered))


def export_curves(history: TrainingHistory, path: str | Path) -> None:
    """Write the training-history CSV (header + one row per epoch)."""
    if len(history) < 1:
        raise ValueError("history must contain at least one epoch")
    write_history_csv(history, path)


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "arch_name": report.arch_name,
        "model_id": report.model_id,
        "splits": {
            split: {
                "accuracy": metrics.accuracy,
                "loss": metrics.loss,
                "confusion": [list(row) for row in metrics.confusion],
            }
            for split, metrics in report.splits.items()
        },
    }


def report_from_dict(payload: dict) -> EvaluationReport:
    splits = {
        split: Metrics(
            accuracy=float(values["accuracy"]),
            loss=float(values["loss"]),
            confusion=tuple(tuple(int(v) for v in row) for row in values["confusion"]),
        )
        for split, values in payload["splits"].items()
    }
    return EvaluationReport(arch_name=payload["arch_name"], model_id=payload["model_id"], splits=splits)


def write_report_json(report: EvaluationReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def load_report_json(path: str | Path) -> EvaluationReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
