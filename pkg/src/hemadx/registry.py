"""Content-addressed store for trained models and their metadata.

Layout under the registry root:

    index.jsonl           one metadata object per line, append order
    weights/<id>.weights.h5
    reports/<id>.json     evaluation report, when one was provided
    history/<id>.csv      per-epoch training curves

The model id is the first 16 hex characters of the sha256 of the weights
file, so duplicates are detected by construction and loads can verify
integrity against the id itself. Writes go to a temp file first and are
renamed into place.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import zoo
from .errors import ConflictError, IntegrityError, ManifestError, ModelNotFoundError
from .evaluator import EvaluationReport, load_report_json, write_report_json
from .labels import DISPLAY_NAMES
from .trainer import TrainedModel, write_history_csv
from .zoo import ModelGraph

INDEX_NAME = "index.jsonl"
ID_LENGTH = 16


@dataclass(frozen=True)
class ModelArtifactMeta:
    model_id: str
    arch_name: str
    created_at: str
    val_accuracy: float
    final_val_loss: float
    test_accuracy: float | None
    weights_path: str
    config: dict
    label_order: tuple[str, ...]

    def __post_init__(self) -> None:
        if tuple(self.label_order) != DISPLAY_NAMES:
            raise ValueError(f"label order must be the canonical {DISPLAY_NAMES}")


class Registry:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def index_path(self) -> Path:
        return self.root / INDEX_NAME

    def save_artifact(self, trained: TrainedModel, report: EvaluationReport | None = None) -> str:
        """Serialize weights and append a metadata row; returns the model id."""
        weights_dir = self.root / "weights"
        weights_dir.mkdir(parents=True, exist_ok=True)

        temp = weights_dir / f".incoming-{os.getpid()}.weights.h5"
        trained.model.model.save_weights(str(temp))
        model_id = _sha256(temp)[:ID_LENGTH]
        weights_file = weights_dir / f"{model_id}.weights.h5"

        if any(meta.model_id == model_id for meta in self.list_artifacts()):
            temp.unlink()
            raise ConflictError(f"artifact {model_id} already exists in {self.root}")
        temp.replace(weights_file)

        meta = ModelArtifactMeta(
            model_id=model_id,
            arch_name=trained.arch_name,
            created_at=datetime.now(timezone.utc).isoformat(),
            val_accuracy=trained.best_val_accuracy,
            final_val_loss=trained.history.val_loss[-1],
            test_accuracy=report.test.accuracy if report else None,
            weights_path=f"weights/{weights_file.name}",
            config=dataclasses.asdict(trained.config),
            label_order=DISPLAY_NAMES,
        )
        self._append_index(meta)

        history_dir = self.root / "history"
        history_dir.mkdir(exist_ok=True)
        write_history_csv(trained.history, history_dir / f"{model_id}.csv")
        if report is not None:
            reports_dir = self.root / "reports"
            reports_dir.mkdir(exist_ok=True)
            # stamp the content-derived id; callers cannot know it pre-save
            stamped = dataclasses.replace(report, model_id=model_id)
            write_report_json(stamped, reports_dir / f"{model_id}.json")
        return model_id

    def load_artifact(self, model_id: str) -> tuple[ModelGraph, ModelArtifactMeta]:
        """Rebuild the architecture and restore its stored weights."""
        meta = self._find(model_id)
        weights_file = self.root / meta.weights_path
        if not weights_file.is_file():
            raise IntegrityError(f"weights file {weights_file} is missing")
        if _sha256(weights_file)[:ID_LENGTH] != model_id:
            raise IntegrityError(f"weights file {weights_file} does not match id {model_id}")
        graph = zoo.build_model(meta.arch_name, pretrained=False)
        try:
            graph.model.load_weights(str(weights_file))
        except Exception as exc:
            raise IntegrityError(f"weights file {weights_file} failed to load: {exc}") from exc
        return graph, meta

    def best_model(self) -> str:
        """Id of the artifact with the highest validation accuracy
        (ties: lower final validation loss, then architecture name)."""
        metas = self.list_artifacts()
        if not metas:
            raise ModelNotFoundError(f"registry {self.root} is empty")
        best = min(metas, key=lambda m: (-m.val_accuracy, m.final_val_loss, m.arch_name))
        return best.model_id

    def list_artifacts(self) -> list[ModelArtifactMeta]:
        if not self.index_path.is_file():
            return []
        metas = []
        for line_number, line in enumerate(self.index_path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                metas.append(
                    ModelArtifactMeta(
                        model_id=row["model_id"],
                        arch_name=row["arch_name"],
                        created_at=row["created_at"],
                        val_accuracy=float(row["val_accuracy"]),
                        final_val_loss=float(row["final_val_loss"]),
                        test_accuracy=None if row["test_accuracy"] is None else float(row["test_accuracy"]),
                        weights_path=row["weights_path"],
                        config=row["config"],
                        label_order=tuple(row["label_order"]),
                    )
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ManifestError(f"corrupt registry index at line {line_number}: {exc}") from exc
        return metas

    def report_for(self, model_id: str) -> EvaluationReport | None:
        path = self.root / "reports" / f"{model_id}.json"
        return load_report_json(path) if path.is_file() else None

    def audit(self) -> dict[str, list[str]]:
        """Cross-check the index against the weights directory."""
        metas = self.list_artifacts()
        indexed = {self.root / meta.weights_path for meta in metas}
        on_disk = set((self.root / "weights").glob("*.weights.h5")) if (self.root / "weights").is_dir() else set()
        return {
            "orphans": sorted(str(p) for p in on_disk - indexed),
            "missing": sorted(str(p) for p in indexed - on_disk),
        }

    def _find(self, model_id: str) -> ModelArtifactMeta:
        for meta in self.list_artifacts():
            if meta.model_id == model_id:
                return meta
        raise ModelNotFoundError(f"model id {model_id!r} not found in {self.root}")

    def _append_index(self, meta: ModelArtifactMeta) -> None:
        existing = self.index_path.read_text(encoding="utf-8") if self.index_path.is_file() else ""
        row = dataclasses.asdict(meta)
        row["label_order"] = list(meta.label_order)
        temp = self.index_path.with_name(INDEX_NAME + ".tmp")
        temp.write_text(existing + json.dumps(row) + "\n", encoding="utf-8")
        temp.replace(self.index_path)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
