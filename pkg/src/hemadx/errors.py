"""Exception types shared across the toolkit."""

from __future__ import annotations


class HemadxError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(HemadxError):
    """Invalid configuration value (ratios, dimensions, hyperparameters)."""


class CorpusLayoutError(HemadxError):
    """Corpus directory does not match the expected class-folder layout."""


class EmptyClassError(CorpusLayoutError):
    """A class folder contains no images."""


class InsufficientDataError(HemadxError):
    """A class is too small to populate every non-zero split."""


class ManifestError(HemadxError):
    """Split manifest failed to parse or violates its invariants."""


class DecodeError(HemadxError):
    """Bytes could not be decoded into a 3-channel image."""


class StateError(HemadxError):
    """Operation applied to a tensor in the wrong value range."""


class DataError(HemadxError):
    """An image file referenced by the manifest could not be read."""


class AssetError(HemadxError):
    """Pretrained backbone weights are required but unavailable."""


class ContractError(HemadxError):
    """Model and data stream shapes do not agree."""


class DivergenceError(HemadxError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, epoch: int, batch: int):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class RegistryError(HemadxError):
    """Base class for model registry failures."""


class ConflictError(RegistryError):
    """An artifact with the same id already exists."""


class ModelNotFoundError(RegistryError):
    """Requested model id is not present in the registry index."""


class IntegrityError(RegistryError):
    """Stored weights do not match their recorded content hash."""
