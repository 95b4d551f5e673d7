from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
import pytest

from hemadx import ingest
from hemadx.labels import FOLDER_NAMES

# Solid per-class colors (RGB) far enough apart that channel means separate
# the classes linearly; noise keeps the smoke training non-degenerate.
CLASS_COLORS = {
    "Benign": (200, 40, 40),
    "Early": (40, 200, 40),
    "Pre": (40, 40, 200),
    "Pro": (200, 200, 40),
}


def write_image(path: Path, rgb: tuple[int, int, int], size=(64, 64), noise=0.0, rng=None) -> None:
    array = np.full((size[0], size[1], 3), rgb, dtype=np.float32)
    if noise:
        array += rng.normal(0, noise, array.shape)
    array = np.clip(array, 0, 255).astype(np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    assert cv2.imwrite(str(path), cv2.cvtColor(array, cv2.COLOR_RGB2BGR))


def make_corpus(root: Path, per_class: int, size=(64, 64), noise=0.0, seed=0) -> Path:
    rng = np.random.default_rng(seed)
    for folder in FOLDER_NAMES:
        for i in range(per_class):
            write_image(root / folder / f"img_{i:03d}.jpg", CLASS_COLORS[folder], size, noise, rng)
    return root


@pytest.fixture
def tiny_corpus(tmp_path) -> Path:
    """Four classes x three images with mixed aspect ratios."""
    root = tmp_path / "corpus"
    rng = np.random.default_rng(1)
    for folder in FOLDER_NAMES:
        for i, size in enumerate([(60, 80), (80, 60), (64, 64)]):
            write_image(root / folder / f"img_{i}.jpg", CLASS_COLORS[folder], size, 5.0, rng)
    return root


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory) -> Path:
    """The smoke-experiment corpus: 40 solid-color-plus-noise images per class."""
    root = tmp_path_factory.mktemp("synthetic") / "corpus"
    return make_corpus(root, per_class=40, size=(64, 64), noise=12.0, seed=7)


@pytest.fixture(scope="session")
def synthetic_manifest(synthetic_corpus) -> ingest.SplitManifest:
    records = ingest.scan_corpus(synthetic_corpus)
    return ingest.stratified_split(records, (0.70, 0.15, 0.15), seed=0)


@pytest.fixture(scope="session")
def smoke_run(synthetic_manifest):
    """Train the convnet once on the synthetic corpus; shared by trainer and
    acceptance tests (it is the expensive part of the suite)."""
    from hemadx import pipeline, trainer, zoo

    config = trainer.TrainConfig(epochs=4, batch_size=32, learning_rate=1e-3, seed=0)
    trainer.seed_everything(config.seed)
    graph = zoo.build_convnet()
    train_stream = pipeline.make_train_stream(synthetic_manifest, batch_size=config.batch_size, seed=config.seed)
    val_stream = pipeline.make_eval_stream(synthetic_manifest, "val", batch_size=config.batch_size)
    trained = trainer.train(graph, train_stream, val_stream, config)
    return {
        "trained": trained,
        "manifest": synthetic_manifest,
        "val_stream": val_stream,
        "config": config,
    }


@pytest.fixture(scope="session")
def fixture_registry(tmp_path_factory, tiny_session_corpus):
    """A registry holding one small trained-ish model, plus the corpus it can
    classify; used by registry/service/acceptance tests."""
    from hemadx import trainer, zoo
    from hemadx.registry import Registry

    import keras

    keras.utils.set_random_seed(123)
    graph = zoo.build_convnet()
    history = trainer.TrainingHistory((0.5,), (1.0,), (0.5,), (1.0,))
    trained = trainer.TrainedModel(
        model=graph, history=history, config=trainer.TrainConfig(epochs=1), arch_name="convnet", best_val_accuracy=0.5
    )
    registry_dir = tmp_path_factory.mktemp("registry")
    model_id = Registry(registry_dir).save_artifact(trained)
    return {"dir": registry_dir, "model_id": model_id, "graph": graph, "corpus": tiny_session_corpus}


@pytest.fixture(scope="session")
def tiny_session_corpus(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("tiny") / "corpus"
    return make_corpus(root, per_class=3, size=(60, 80), noise=5.0, seed=3)


@pytest.fixture(scope="session")
def all_graphs():
    """One built (random-init) graph per architecture, shared session-wide.

    Tests may retrain or reset the trainable heads, but nothing here depends
    on weight values: audits, tallies, and softmax/gradient contracts hold
    for any weights."""
    from hemadx import zoo

    return {name: zoo.build_model(name, pretrained=False) for name in zoo.ARCH_ORDER}
