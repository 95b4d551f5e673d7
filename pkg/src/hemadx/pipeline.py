"""Image preparation pipeline: pad, resize, augment (train only), normalize.

Order of operations is decode -> pad_to_square -> resize -> augment (train
streams only) -> normalize. Geometric work happens on raw [0, 255] float32
pixels; normalization to [0, 1] is always last. Evaluation streams apply no
augmentation and no shuffling, so their output is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

import cv2
import numpy as np

from .errors import ConfigError, DataError, DecodeError, StateError
from .ingest import ImageRecord, SplitManifest
from .labels import NUM_CLASSES

RAW = "raw"
NORMALIZED = "normalized"

_RANGE_MAX = {RAW: 255.0, NORMALIZED: 1.0}


@dataclass(frozen=True)
class PreprocessConfig:
    target_height: int = 224
    target_width: int = 224
    channels: int = 3
    shear_range: float = 0.2
    zoom_range: float = 0.2
    horizontal_flip: bool = True
    pad_mode: str = "constant-black"
    normalization: str = "scale-to-unit"

    def __post_init__(self) -> None:
        if self.target_height <= 0 or self.target_width <= 0:
            raise ConfigError(f"target dims must be positive, got {self.target_height}x{self.target_width}")
        if not 0 <= self.shear_range < 1:
            raise ConfigError(f"shear_range must be in [0, 1), got {self.shear_range}")
        if not 0 <= self.zoom_range < 1:
            raise ConfigError(f"zoom_range must be in [0, 1), got {self.zoom_range}")
        if self.channels != 3:
            raise ConfigError(f"only 3-channel pipelines are supported, got {self.channels}")


DEFAULT_CONFIG = PreprocessConfig()


@dataclass(frozen=True)
class ImageTensor:
    """H x W x 3 float32 pixel array tagged with its declared value range."""

    data: np.ndarray
    value_range: str = RAW

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ValueError(f"expected HxWx3 data, got shape {self.data.shape}")
        if self.value_range not in _RANGE_MAX:
            raise ValueError(f"unknown value_range {self.value_range!r}")
        lo, hi = float(self.data.min()), float(self.data.max())
        if lo < 0 or hi > _RANGE_MAX[self.value_range] + 1e-6:
            raise ValueError(f"values [{lo}, {hi}] outside declared {self.value_range} range")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def decode(image_bytes: bytes) -> ImageTensor:
    """Decode raster bytes to a raw RGB tensor; grayscale is replicated."""
    buffer = np.frombuffer(image_bytes, dtype=np.uint8)
    bgr = cv2.imdecode(buffer, cv2.IMREAD_COLOR)
    if bgr is None:
        raise DecodeError("bytes are not a decodable raster image")
    rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    return ImageTensor(rgb.astype(np.float32), RAW)


def pad_to_square(tensor: ImageTensor) -> ImageTensor:
    """Center the image on a black max(H, W) square; squares pass through."""
    if tensor.value_range != RAW:
        raise StateError("pad_to_square expects a raw tensor")
    height, width = tensor.height, tensor.width
    if height == width:
        return tensor
    side = max(height, width)
    top = (side - height) // 2
    left = (side - width) // 2
    padded = cv2.copyMakeBorder(
        tensor.data,
        top,
        side - height - top,
        left,
        side - width - left,
        borderType=cv2.BORDER_CONSTANT,
        value=0,
    )
    return ImageTensor(padded, RAW)


def resize(tensor: ImageTensor, target_h: int, target_w: int) -> ImageTensor:
    """Bilinear resize to target_h x target_w; value range is preserved."""
    if target_h <= 0 or target_w <= 0:
        raise ConfigError(f"resize targets must be positive, got {target_h}x{target_w}")
    if (tensor.height, tensor.width) == (target_h, target_w):
        return tensor
    resized = cv2.resize(tensor.data, (target_w, target_h), interpolation=cv2.INTER_LINEAR)
    return ImageTensor(np.clip(resized, 0, _RANGE_MAX[tensor.value_range]), tensor.value_range)


def normalize(tensor: ImageTensor) -> ImageTensor:
    """Scale raw [0, 255] pixels to [0, 1]."""
    if tensor.value_range != RAW:
        raise StateError("tensor is already normalized")
    return ImageTensor(tensor.data / 255.0, NORMALIZED)


def augment(
    tensor: ImageTensor,
    rng: np.random.Generator,
    config: PreprocessConfig = DEFAULT_CONFIG,
) -> ImageTensor:
    """Random horizontal flip, shear, and zoom; deterministic given ``rng``.

    Draws, in order: flip with probability 0.5 (when enabled), a shear factor
    from [-shear_range, +shear_range], and a zoom factor from
    [1 - zoom_range, 1 + zoom_range]. Transforms are about the image center
    with black fill and unchanged output size.
    """
    flip = config.horizontal_flip and rng.random() < 0.5
    shear = rng.uniform(-config.shear_range, config.shear_range)
    zoom = rng.uniform(1.0 - config.zoom_range, 1.0 + config.zoom_range)
    return apply_augment(tensor, flip=flip, shear=shear, zoom=zoom)


def apply_augment(tensor: ImageTensor, flip: bool, shear: float, zoom: float) -> ImageTensor:
    """Apply explicit augmentation parameters (flip, then shear, then zoom)."""
    data = tensor.data
    if flip:
        data = np.ascontiguousarray(data[:, ::-1, :])
    height, width = data.shape[0], data.shape[1]
    center_x, center_y = (width - 1) / 2.0, (height - 1) / 2.0
    data = _warp(data, np.array([[1.0, shear, -shear * center_y], [0.0, 1.0, 0.0]]))
    data = _warp(data, np.array([[zoom, 0.0, center_x * (1 - zoom)], [0.0, zoom, center_y * (1 - zoom)]]))
    return ImageTensor(np.clip(data, 0, _RANGE_MAX[tensor.value_range]), tensor.value_range)


def _warp(data: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    return cv2.warpAffine(
        data,
        matrix,
        (data.shape[1], data.shape[0]),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=0,
    )


def _load_prepared(record: ImageRecord, config: PreprocessConfig) -> ImageTensor:
    """Read, decode, pad, and resize one record (shared by both streams)."""
    try:
        raw_bytes = Path(record.path).read_bytes()
        tensor = decode(raw_bytes)
    except (OSError, DecodeError) as exc:
        raise DataError(f"cannot read image {record.path!r}: {exc}") from exc
    tensor = pad_to_square(tensor)
    return resize(tensor, config.target_height, config.target_width)


def _one_hot(label_ids: list[int]) -> np.ndarray:
    return np.eye(NUM_CLASSES, dtype=np.float32)[label_ids]


class TrainStream:
    """Per-epoch reshuffled batches of augmented, normalized train tensors.

    Each full iteration yields one epoch in which every train record appears
    exactly once; the shuffle order and augmentation draws for epoch ``e``
    derive from (seed, e) only. Single-consumer; construct one stream per
    concurrent consumer.
    """

    def __init__(self, manifest: SplitManifest, config: PreprocessConfig, batch_size: int, seed: int):
        if batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
        self.records = manifest.records_for("train")
        self.config = config
        self.batch_size = batch_size
        self.seed = seed
        self._next_epoch = 0

    def __len__(self) -> int:
        return (len(self.records) + self.batch_size - 1) // self.batch_size

    def epoch_order(self, epoch: int) -> list[int]:
        """Record indices in the order epoch ``epoch`` visits them."""
        rng = np.random.default_rng([self.seed, epoch])
        return list(rng.permutation(len(self.records)))

    def epoch(self, epoch: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        order = self.epoch_order(epoch)
        rng = np.random.default_rng([self.seed, epoch, 1])
        for start in range(0, len(order), self.batch_size):
            chunk = order[start : start + self.batch_size]
            tensors = []
            for index in chunk:
                tensor = _load_prepared(self.records[index], self.config)
                tensor = augment(tensor, rng, self.config)
                tensors.append(normalize(tensor).data)
            labels = _one_hot([self.records[index].label.id for index in chunk])
            yield np.stack(tensors), labels

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        epoch = self._next_epoch
        self._next_epoch += 1
        return self.epoch(epoch)


class EvalStream:
    """Deterministic pad/resize/normalize batches in manifest order."""

    def __init__(self, manifest: SplitManifest, split: str, config: PreprocessConfig, batch_size: int):
        if split not in ("train", "val", "test"):
            raise ConfigError(f"split must be train, val, or test, got {split!r}")
        if batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
        self.records = manifest.records_for(split)
        self.split = split
        self.config = config
        self.batch_size = batch_size

    def __len__(self) -> int:
        return (len(self.records) + self.batch_size - 1) // self.batch_size

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for start in range(0, len(self.records), self.batch_size):
            chunk = self.records[start : start + self.batch_size]
            tensors = [normalize(_load_prepared(record, self.config)).data for record in chunk]
            labels = _one_hot([record.label.id for record in chunk])
            yield np.stack(tensors), labels


def make_train_stream(
    manifest: SplitManifest,
    config: PreprocessConfig = DEFAULT_CONFIG,
    batch_size: int = 32,
    seed: int = 0,
) -> TrainStream:
    return TrainStream(manifest, config, batch_size, seed)


def make_eval_stream(
    manifest: SplitManifest,
    split: str,
    config: PreprocessConfig = DEFAULT_CONFIG,
    batch_size: int = 32,
) -> EvalStream:
    return EvalStream(manifest, split, config, batch_size)
