"""Corpus discovery and seeded stratified train/val/test splitting.

The corpus is a directory with exactly four class folders (Benign, Early,
Pre, Pro), each holding decodable raster images. A split manifest records the
assignment of every image to train/val/test and is byte-reproducible from
(corpus, ratios, seed).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyClassError, CorpusLayoutError, InsufficientDataError, ManifestError
from .labels import CLASS_LABELS, ClassLabel, FOLDER_NAMES, label_for_folder

MANIFEST_VERSION = "1"
SPLITS = ("train", "val", "test")
DEFAULT_RATIOS = (0.70, 0.15, 0.15)

IMAGE_EXTENSIONS = {".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff", ".webp"}


@dataclass(frozen=True)
class ImageRecord:
    path: str
    label: ClassLabel
    split: str = "unassigned"


@dataclass(frozen=True)
class SplitManifest:
    version: str
    seed: int
    ratios: tuple[float, float, float]
    records: tuple[ImageRecord, ...]
    counts: dict[str, dict[str, int]] = field(compare=False)

    def records_for(self, split: str) -> tuple[ImageRecord, ...]:
        return tuple(r for r in self.records if r.split == split)

    def validate(self) -> None:
        """Check every manifest invariant; raise ManifestError on violation."""
        if self.version != MANIFEST_VERSION:
            raise ManifestError(f"manifest version {self.version!r} not supported (expected {MANIFEST_VERSION!r})")
        _check_ratios(self.ratios)
        seen: set[str] = set()
        for record in self.records:
            if record.split not in SPLITS:
                raise ManifestError(f"record {record.path!r} has split {record.split!r}, expected one of {SPLITS}")
            if record.path in seen:
                raise ManifestError(f"record {record.path!r} appears more than once; splits must be disjoint")
            seen.add(record.path)
        observed = _tally(self.records)
        if observed != self.counts:
            raise ManifestError("stored counts do not match tallies recomputed from records")
        for label in CLASS_LABELS:
            label_total = sum(observed[label.folder_name].values())
            for split, ratio in zip(SPLITS, self.ratios):
                got = observed[label.folder_name][split]
                if abs(got - ratio * label_total) > 1 + 1e-9:
                    raise ManifestError(
                        f"stratification violated for ({label.folder_name}, {split}): "
                        f"{got} of {label_total} vs ratio {ratio}"
                    )


def scan_corpus(root: str | Path) -> list[ImageRecord]:
    """Discover the class-foldered corpus under ``root``.

    Returns one unassigned record per image, ordered lexicographically by
    path. Any unrecognized folder or non-image file is an error, not a skip:
    silent skipping would hide corpus corruption.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root {root} does not exist")

    entries = sorted(root.iterdir())
    folders = [e for e in entries if e.is_dir()]
    stray = [e for e in entries if not e.is_dir()]
    if stray:
        raise CorpusLayoutError(f"unexpected non-directory entries under corpus root: {[e.name for e in stray]}")
    unknown = [f.name for f in folders if f.name not in FOLDER_NAMES]
    if unknown:
        raise CorpusLayoutError(f"unrecognized class folder {unknown[0]!r} under {root}")
    missing = [name for name in FOLDER_NAMES if not (root / name).is_dir()]
    if missing:
        raise CorpusLayoutError(f"missing class folders under {root}: {missing}")

    records: list[ImageRecord] = []
    for name in FOLDER_NAMES:
        label = label_for_folder(name)
        class_records = []
        for entry in sorted((root / name).iterdir()):
            if entry.is_dir():
                raise CorpusLayoutError(f"nested directory {entry} inside class folder {name!r}")
            if entry.suffix.lower() not in IMAGE_EXTENSIONS:
                raise CorpusLayoutError(f"non-image file {entry} inside class folder {name!r}")
            class_records.append(ImageRecord(path=str(entry), label=label))
        if not class_records:
            raise EmptyClassError(f"class folder {name!r} contains no images")
        records.extend(class_records)
    records.sort(key=lambda r: r.path)
    return records


def stratified_split(
    records: list[ImageRecord] | tuple[ImageRecord, ...],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitManifest:
    """Assign every record to train/val/test, stratified per class.

    Shuffling is per-label with a generator seeded from (seed, label id), so
    the same (corpus, ratios, seed) always yields the same manifest. Split
    sizes use largest-remainder rounding, which keeps every per-(label,
    split) count within 1 of ratio * label_total.
    """
    _check_ratios(ratios)
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")

    by_label: dict[int, list[int]] = {label.id: [] for label in CLASS_LABELS}
    for index, record in enumerate(records):
        by_label[record.label.id].append(index)

    nonzero_splits = sum(1 for ratio in ratios if ratio > 0)
    for label in CLASS_LABELS:
        if len(by_label[label.id]) < nonzero_splits:
            raise InsufficientDataError(
                f"class {label.folder_name!r} has {len(by_label[label.id])} records, "
                f"fewer than the {nonzero_splits} non-zero splits"
            )

    assignment: dict[int, str] = {}
    for label in CLASS_LABELS:
        indices = list(by_label[label.id])
        rng = np.random.default_rng([seed, label.id])
        rng.shuffle(indices)
        for split, count in zip(SPLITS, _allocate(len(indices), ratios)):
            for index in indices[:count]:
                assignment[index] = split
            indices = indices[count:]

    assigned = tuple(replace(record, split=assignment[index]) for index, record in enumerate(records))
    manifest = SplitManifest(
        version=MANIFEST_VERSION,
        seed=seed,
        ratios=tuple(ratios),
        records=assigned,
        counts=_tally(assigned),
    )
    manifest.validate()
    return manifest


def save_manifest(manifest: SplitManifest, path: str | Path) -> None:
    """Serialize the manifest to JSON atomically (temp file + rename)."""
    manifest.validate()
    for record in manifest.records:
        if not os.access(record.path, os.R_OK):
            raise ManifestError(f"record path {record.path!r} does not exist or is unreadable")
    path = Path(path)
    payload = {
        "version": manifest.version,
        "seed": manifest.seed,
        "ratios": list(manifest.ratios),
        "records": [
            {"path": r.path, "label": r.label.folder_name, "split": r.split} for r in manifest.records
        ],
        "counts": manifest.counts,
    }
    temp = path.with_name(path.name + ".tmp")
    temp.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    temp.replace(path)


def load_manifest(path: str | Path) -> SplitManifest:
    """Parse a manifest file and re-validate every invariant."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest {path} does not exist")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        records = tuple(
            ImageRecord(path=row["path"], label=label_for_folder(row["label"]), split=row["split"])
            for row in payload["records"]
        )
        manifest = SplitManifest(
            version=str(payload["version"]),
            seed=int(payload["seed"]),
            ratios=tuple(float(x) for x in payload["ratios"]),
            records=records,
            counts={k: dict(v) for k, v in payload["counts"].items()},
        )
    except ManifestError:
        raise
    except (KeyError, TypeError, ValueError, CorpusLayoutError, json.JSONDecodeError) as exc:
        raise ManifestError(f"failed to parse manifest {path}: {exc}") from exc
    manifest.validate()
    return manifest


def _check_ratios(ratios: tuple[float, float, float]) -> None:
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ConfigError(f"ratios must be three non-negative fractions, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got {ratios} (sum {sum(ratios)})")


def _allocate(total: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder apportionment of ``total`` across the three splits."""
    ideal = [ratio * total for ratio in ratios]
    base = [math.floor(x) for x in ideal]
    remainder = total - sum(base)
    order = sorted(range(3), key=lambda i: ideal[i] - base[i], reverse=True)
    for i in order[:remainder]:
        base[i] += 1
    return base


def _tally(records: tuple[ImageRecord, ...]) -> dict[str, dict[str, int]]:
    counts = {label.folder_name: {split: 0 for split in SPLITS} for label in CLASS_LABELS}
    for record in records:
        if record.split in SPLITS:
            counts[record.label.folder_name][record.split] += 1
    return counts
