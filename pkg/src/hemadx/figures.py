"""Matplotlib renderings of training curves and model comparisons.

Used by the CLI report path; the CSV files remain the machine-readable
contract and these PNGs sit alongside them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluator import ComparisonTable
from .trainer import TrainingHistory


def save_history_figures(history: TrainingHistory, out_dir: str | Path, name: str) -> list[Path]:
    """Write <name>_accuracy.png and <name>_loss.png (train vs validation)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    epochs = range(1, len(history) + 1)
    paths = []
    for metric, train_series, val_series in (
        ("accuracy", history.train_accuracy, history.val_accuracy),
        ("loss", history.train_loss, history.val_loss),
    ):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(epochs, train_series, marker="o", label=f"training {metric}")
        ax.plot(epochs, val_series, marker="s", label=f"validation {metric}")
        ax.set_xlabel("epoch")
        ax.set_ylabel(metric)
        ax.set_title(f"{name}: training vs validation {metric}")
        ax.legend()
        ax.grid(alpha=0.3)
        path = out_dir / f"{name}_{metric}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(path)
    return paths


def save_comparison_figure(table: ComparisonTable, path: str | Path) -> Path:
    """Bar chart of test accuracy per model, annotated with loss."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [row[0] for row in table.rows]
    accuracies = [row[1] for row in table.rows]
    losses = [row[2] for row in table.rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(names, accuracies, color="tab:blue")
    for bar, loss in zip(bars, losses):
        ax.annotate(
            f"loss {loss:.3f}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("test accuracy")
    ax.set_title("test accuracy by model")
    ax.grid(axis="y", alpha=0.3)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
