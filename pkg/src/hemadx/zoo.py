"""The four classifier architectures and their parameter-count audits.

Three transfer models pair a frozen, ImageNet-initialized convolutional
backbone with a trainable Flatten -> Dense(4, softmax) head; the fourth is a
small fully-trainable convolutional network. Parameter counts of the transfer
models are exact structural contracts:

    mobilenet  3,429,572 total =   200,708 trainable + 3,228,864 frozen
    resnet50  23,989,124 total =   401,412 trainable + 23,587,712 frozen
    vgg19     20,124,740 total =   100,356 trainable + 20,024,384 frozen

The mobilenet backbone is the depthwise-separable stack ending in a 7x7x1024
feature map; that is the graph whose counts match the contract, and counts
win over naming.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import keras
from keras import layers

from .errors import AssetError
from .labels import NUM_CLASSES

INPUT_SHAPE = (224, 224, 3)
ARCH_ORDER = ("convnet", "mobilenet", "resnet50", "vgg19")

_BACKBONES = {
    "mobilenet": (keras.applications.MobileNet, "mobilenet_1_0_224_tf_no_top.h5"),
    "resnet50": (keras.applications.ResNet50, "resnet50_weights_tf_dim_ordering_tf_kernels_notop.h5"),
    "vgg19": (keras.applications.VGG19, "vgg19_weights_tf_dim_ordering_tf_kernels_notop.h5"),
}

_LAYER_KINDS = {
    "Conv2D": "conv",
    "DepthwiseConv2D": "depthwise_conv",
    "SeparableConv2D": "separable_conv",
    "MaxPooling2D": "pool",
    "AveragePooling2D": "pool",
    "GlobalAveragePooling2D": "global_pool",
    "Dropout": "dropout",
    "Flatten": "flatten",
    "Dense": "dense",
    "BatchNormalization": "batch_norm",
    "Activation": "activation",
    "ReLU": "activation",
    "ZeroPadding2D": "zero_pad",
    "Add": "add",
    "Reshape": "reshape",
}


@dataclass(frozen=True)
class ArchitectureSpec:
    name: str
    input_shape: tuple[int, int, int]
    num_classes: int
    backbone_frozen: bool
    layer_summary: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class ParameterAudit:
    total: int
    trainable: int
    frozen: int

    def __post_init__(self) -> None:
        if self.total != self.trainable + self.frozen:
            raise ValueError(f"audit inconsistent: {self.total} != {self.trainable} + {self.frozen}")
        if min(self.total, self.trainable, self.frozen) < 0:
            raise ValueError("parameter counts must be non-negative")


@dataclass
class ModelGraph:
    """A built classifier: declarative spec plus the executable graph."""

    spec: ArchitectureSpec
    model: keras.Model = field(repr=False)

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Run inference on an N x 224 x 224 x 3 batch; rows are softmax."""
        return np.asarray(self.model(np.asarray(batch, dtype=np.float32), training=False))


def build_convnet() -> ModelGraph:
    """11-layer fully-trainable network: 4 conv / 3 pool / 2 dropout / flatten / dense."""
    model = keras.Sequential(
        [
            keras.Input(INPUT_SHAPE),
            layers.Conv2D(32, 3, padding="same", activation="relu"),
            layers.MaxPooling2D(2),
            layers.Conv2D(64, 3, padding="same", activation="relu"),
            layers.MaxPooling2D(2),
            layers.Conv2D(128, 3, padding="same", activation="relu"),
            layers.MaxPooling2D(2),
            layers.Conv2D(256, 3, padding="same", activation="relu"),
            layers.Dropout(0.25),
            layers.Flatten(),
            layers.Dropout(0.5),
            layers.Dense(NUM_CLASSES, activation="softmax"),
        ],
        name="convnet",
    )
    return _graph("convnet", model, backbone_frozen=False)


def build_mobilenet_head(pretrained: bool = True, weights_path: str | Path | None = None) -> ModelGraph:
    """Frozen depthwise-separable backbone (7x7x1024) + trainable softmax head."""
    return _build_transfer("mobilenet", pretrained, weights_path)


def build_resnet50_head(pretrained: bool = True, weights_path: str | Path | None = None) -> ModelGraph:
    """Frozen 50-layer residual backbone (7x7x2048) + trainable softmax head."""
    return _build_transfer("resnet50", pretrained, weights_path)


def build_vgg19_head(pretrained: bool = True, weights_path: str | Path | None = None) -> ModelGraph:
    """Frozen 16-conv/5-pool backbone (7x7x512) + trainable softmax head."""
    return _build_transfer("vgg19", pretrained, weights_path)


def build_model(name: str, pretrained: bool = True, weights_path: str | Path | None = None) -> ModelGraph:
    """Build any architecture by name; see ARCH_ORDER for the valid names."""
    if name == "convnet":
        return build_convnet()
    if name in _BACKBONES:
        return _build_transfer(name, pretrained, weights_path)
    raise ValueError(f"unknown architecture {name!r}; expected one of {ARCH_ORDER}")


def audit_parameters(graph: ModelGraph) -> ParameterAudit:
    """Count (total, trainable, frozen) weights by traversing the graph."""
    trainable = int(sum(np.prod(w.shape) for w in graph.model.trainable_weights))
    frozen = int(sum(np.prod(w.shape) for w in graph.model.non_trainable_weights))
    return ParameterAudit(total=trainable + frozen, trainable=trainable, frozen=frozen)


def layer_kind_tally(graph: ModelGraph) -> dict[str, int]:
    """Count layers of each kind in the spec's flattened layer summary."""
    tally: dict[str, int] = {}
    for kind, _ in graph.spec.layer_summary:
        tally[kind] = tally.get(kind, 0) + 1
    return tally


def _build_transfer(name: str, pretrained: bool, weights_path: str | Path | None) -> ModelGraph:
    ctor, canonical_file = _BACKBONES[name]
    base = _build_backbone(name, ctor, canonical_file, pretrained, weights_path)
    base.trainable = False
    head = layers.Dense(NUM_CLASSES, activation="softmax", name="subtype_head")(
        layers.Flatten(name="flatten")(base.output)
    )
    model = keras.Model(base.input, head, name=name)
    return _graph(name, model, backbone_frozen=True)


def _build_backbone(
    name: str,
    ctor,
    canonical_file: str,
    pretrained: bool,
    weights_path: str | Path | None,
) -> keras.Model:
    if weights_path is None and pretrained:
        asset_dir = os.environ.get("HEMA_WEIGHTS_DIR")
        if asset_dir and (Path(asset_dir) / canonical_file).is_file():
            weights_path = Path(asset_dir) / canonical_file

    if weights_path is not None:
        base = ctor(include_top=False, weights=None, input_shape=INPUT_SHAPE)
        try:
            base.load_weights(str(weights_path))
        except Exception as exc:
            raise AssetError(f"failed to load {name} backbone weights from {weights_path}: {exc}") from exc
        return base

    if not pretrained:
        return ctor(include_top=False, weights=None, input_shape=INPUT_SHAPE)

    try:
        return ctor(include_top=False, weights="imagenet", input_shape=INPUT_SHAPE)
    except Exception as exc:
        raise AssetError(
            f"pretrained {name} backbone weights unavailable (no cache, no download): {exc}. "
            f"Place {canonical_file} in a directory named by HEMA_WEIGHTS_DIR, or pass weights_path."
        ) from exc


def _graph(name: str, model: keras.Model, backbone_frozen: bool) -> ModelGraph:
    spec = ArchitectureSpec(
        name=name,
        input_shape=INPUT_SHAPE,
        num_classes=NUM_CLASSES,
        backbone_frozen=backbone_frozen,
        layer_summary=tuple(_summarize(model)),
    )
    return ModelGraph(spec=spec, model=model)


def _summarize(model: keras.Model) -> list[tuple[str, int]]:
    summary: list[tuple[str, int]] = []
    for layer in model.layers:
        if isinstance(layer, keras.Model):
            summary.extend(_summarize(layer))
            continue
        if layer.__class__.__name__ == "InputLayer":
            continue
        kind = _LAYER_KINDS.get(layer.__class__.__name__, layer.__class__.__name__.lower())
        summary.append((kind, int(layer.count_params())))
    return summary
