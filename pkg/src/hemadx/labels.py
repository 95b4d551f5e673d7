"""The four blood-cell classes and their canonical ordering.

Index order is alphabetical by corpus folder name; it is fixed and shared by
every stage of the toolkit (one-hot encoding, softmax heads, reports, and the
diagnosis service all rely on it).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CorpusLayoutError


@dataclass(frozen=True)
class ClassLabel:
    id: int
    folder_name: str
    display_name: str


CLASS_LABELS: tuple[ClassLabel, ...] = (
    ClassLabel(0, "Benign", "Benign"),
    ClassLabel(1, "Early", "Early Pre-B"),
    ClassLabel(2, "Pre", "Pre-B"),
    ClassLabel(3, "Pro", "Pro-B"),
)

NUM_CLASSES = len(CLASS_LABELS)
FOLDER_NAMES = tuple(label.folder_name for label in CLASS_LABELS)
DISPLAY_NAMES = tuple(label.display_name for label in CLASS_LABELS)

_BY_FOLDER = {label.folder_name: label for label in CLASS_LABELS}


def label_for_folder(folder_name: str) -> ClassLabel:
    """Resolve a corpus folder name to its class label."""
    try:
        return _BY_FOLDER[folder_name]
    except KeyError:
        raise CorpusLayoutError(
            f"unrecognized class folder {folder_name!r}; expected one of {sorted(FOLDER_NAMES)}"
        ) from None
