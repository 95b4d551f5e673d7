"""Training loop with per-epoch validation and best-epoch checkpointing.

Each run trains one model for a fixed number of epochs, evaluates the full
validation stream after every epoch, and keeps the weight snapshot from the
epoch with the highest validation accuracy (earlier epoch wins ties). Runs
are bitwise reproducible on CPU for a fixed seed: the loop seeds the global
generators and enables deterministic kernels before the first step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import keras
import tensorflow as tf

from .errors import ConfigError, ContractError, DivergenceError
from .labels import NUM_CLASSES
from .pipeline import EvalStream, TrainStream
from .zoo import ModelGraph

HISTORY_CSV_HEADER = "epoch,train_accuracy,train_loss,val_accuracy,val_loss"

_PROB_FLOOR = 1e-7

_determinism_enabled = False


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    loss: str = "categorical_crossentropy"
    seed: int = 0
    class_weighting: bool = False

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.optimizer != "adam":
            raise ConfigError(f"unsupported optimizer {self.optimizer!r}")
        if self.loss != "categorical_crossentropy":
            raise ConfigError(f"unsupported loss {self.loss!r}")


@dataclass(frozen=True)
class TrainingHistory:
    train_accuracy: tuple[float, ...]
    train_loss: tuple[float, ...]
    val_accuracy: tuple[float, ...]
    val_loss: tuple[float, ...]

    def __post_init__(self) -> None:
        lengths = {len(self.train_accuracy), len(self.train_loss), len(self.val_accuracy), len(self.val_loss)}
        if len(lengths) != 1 or len(self.train_accuracy) < 1:
            raise ValueError("history series must share one length >= 1")
        for name in ("train_accuracy", "val_accuracy"):
            if any(not 0 <= v <= 1 for v in getattr(self, name)):
                raise ValueError(f"{name} values must lie in [0, 1]")
        for name in ("train_loss", "val_loss"):
            if any(v < 0 for v in getattr(self, name)):
                raise ValueError(f"{name} values must be >= 0")

    def __len__(self) -> int:
        return len(self.train_accuracy)


@dataclass
class TrainedModel:
    model: ModelGraph = field(repr=False)
    history: TrainingHistory
    config: TrainConfig
    arch_name: str
    best_val_accuracy: float

    def __post_init__(self) -> None:
        if self.best_val_accuracy != max(self.history.val_accuracy):
            raise ValueError("best_val_accuracy must equal the maximum of history.val_accuracy")


def train(
    graph: ModelGraph,
    train_stream: TrainStream,
    val_stream: EvalStream,
    config: TrainConfig,
) -> TrainedModel:
    """Run the full training schedule and return the best-epoch model."""
    stream_shape = (
        train_stream.config.target_height,
        train_stream.config.target_width,
        train_stream.config.channels,
    )
    if tuple(graph.spec.input_shape) != stream_shape:
        raise ContractError(f"model expects {graph.spec.input_shape} input, stream yields {stream_shape}")

    seed_everything(config.seed)
    model = graph.model
    optimizer = keras.optimizers.Adam(learning_rate=config.learning_rate)
    class_weights = _class_weights(train_stream) if config.class_weighting else None

    train_acc, train_loss, val_acc, val_loss = [], [], [], []
    best_accuracy = -1.0
    best_weights: list[np.ndarray] | None = None

    for epoch in range(config.epochs):
        seen = correct = 0
        loss_sum = 0.0
        for batch_index, (x, y) in enumerate(train_stream.epoch(epoch)):
            weights = None if class_weights is None else class_weights[np.argmax(y, axis=1)]
            loss_value, predictions = _train_step(model, optimizer, x, y, weights)
            if not np.isfinite(loss_value):
                raise DivergenceError(
                    f"non-finite loss {loss_value} at epoch {epoch}, batch {batch_index}",
                    epoch=epoch,
                    batch=batch_index,
                )
            n = len(x)
            seen += n
            loss_sum += float(loss_value) * n
            correct += int((np.argmax(predictions, axis=1) == np.argmax(y, axis=1)).sum())
        train_acc.append(correct / seen)
        train_loss.append(loss_sum / seen)

        accuracy, loss = _stream_metrics(graph, val_stream)
        val_acc.append(accuracy)
        val_loss.append(loss)
        if accuracy > best_accuracy:
            best_accuracy = accuracy
            best_weights = [np.array(w) for w in model.get_weights()]

    assert best_weights is not None
    model.set_weights(best_weights)

    history = TrainingHistory(tuple(train_acc), tuple(train_loss), tuple(val_acc), tuple(val_loss))
    return TrainedModel(
        model=graph,
        history=history,
        config=config,
        arch_name=graph.spec.name,
        best_val_accuracy=max(val_acc),
    )


def select_best(candidates: list[TrainedModel]) -> TrainedModel:
    """Pick by highest validation accuracy; break ties by lower final
    validation loss, then by architecture name."""
    if not candidates:
        raise ValueError("select_best requires at least one candidate")
    return min(
        candidates,
        key=lambda c: (-c.best_val_accuracy, c.history.val_loss[-1], c.arch_name),
    )


def write_history_csv(history: TrainingHistory, path: str | Path) -> None:
    """Write the per-epoch series as CSV, one row per epoch (1-based)."""
    rows = [HISTORY_CSV_HEADER]
    for i in range(len(history)):
        rows.append(
            f"{i + 1},{history.train_accuracy[i]!r},{history.train_loss[i]!r},"
            f"{history.val_accuracy[i]!r},{history.val_loss[i]!r}"
        )
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def seed_everything(seed: int) -> None:
    """Seed Python/NumPy/backend generators and force deterministic kernels.

    Run-to-run reproducibility needs this BEFORE the model is built (weight
    initialization draws from the global generator); train() re-seeds at
    entry so that identically-built models also replay identical dropout and
    shuffle streams.
    """
    global _determinism_enabled
    keras.utils.set_random_seed(seed)
    if not _determinism_enabled:
        tf.config.experimental.enable_op_determinism()
        _determinism_enabled = True


def _train_step(model, optimizer, x, y, sample_weights):
    x = tf.convert_to_tensor(x)
    y = tf.convert_to_tensor(y)
    with tf.GradientTape() as tape:
        predictions = model(x, training=True)
        losses = keras.losses.categorical_crossentropy(y, predictions)
        if sample_weights is not None:
            losses = losses * tf.convert_to_tensor(sample_weights, dtype=losses.dtype)
        loss = tf.reduce_mean(losses)
    gradients = tape.gradient(loss, model.trainable_variables)
    optimizer.apply_gradients(zip(gradients, model.trainable_variables))
    return float(loss), np.asarray(predictions)


def _stream_metrics(graph: ModelGraph, stream: EvalStream) -> tuple[float, float]:
    """Accuracy and mean cross-entropy of the model over one full pass."""
    seen = correct = 0
    loss_sum = 0.0
    for x, y in stream:
        probabilities = graph.forward(x)
        true_ids = np.argmax(y, axis=1)
        correct += int((np.argmax(probabilities, axis=1) == true_ids).sum())
        p_true = probabilities[np.arange(len(x)), true_ids]
        loss_sum += float(-np.log(np.clip(p_true, _PROB_FLOOR, 1.0)).sum())
        seen += len(x)
    if seen == 0:
        raise ValueError("evaluation stream yielded no records")
    return correct / seen, loss_sum / seen


def _class_weights(stream: TrainStream) -> np.ndarray:
    counts = np.zeros(NUM_CLASSES)
    for record in stream.records:
        counts[record.label.id] += 1
    counts = np.maximum(counts, 1)
    weights = counts.sum() / (NUM_CLASSES * counts)
    return weights.astype(np.float32)
