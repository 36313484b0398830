"""Loaders for externally computed high-level features.

Object-probability vectors come from an image classifier's final softmax
layer, saved as plain text; semantic maps come from a scene-parsing network,
saved as single-channel images whose pixel values are category indices.
Nothing here runs a network; files are validated and reduced.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from afva.errors import DimensionError, DomainError, FormatError, NormalizationError

OBJECT_DIM = 1000
SEMANTIC_CATEGORIES = 150

OBJECT_SOURCES = ("alexnet", "vgg16", "resnet", "other")

# Absolute slack on the probability sum; external tools print few decimals.
OBJECT_SUM_TOLERANCE = 1e-3


@dataclass(frozen=True)
class ObjectFeature:
    """1000 class probabilities plus the producing model's tag."""

    probs: np.ndarray
    source: str = "other"

    def __post_init__(self):
        if self.source not in OBJECT_SOURCES:
            raise ValueError(f"unknown source tag {self.source!r}")
        object.__setattr__(
            self, "probs", np.ascontiguousarray(self.probs, dtype=np.float64)
        )


@dataclass(frozen=True)
class SemanticMap:
    """Per-pixel category indices, each in [0, 150)."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if labels.ndim != 2:
            raise ValueError(f"expected a 2-D label map, got shape {labels.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= SEMANTIC_CATEGORIES):
            raise DomainError(
                f"labels must lie in [0, {SEMANTIC_CATEGORIES}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        object.__setattr__(self, "labels", labels)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


def parse_object_feature(text: str, source: str = "other") -> ObjectFeature:
    """Parse whitespace-separated decimal probabilities and validate them."""
    try:
        values = np.array([float(tok) for tok in text.split()], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"object feature file is not numeric: {exc}") from exc
    if values.size != OBJECT_DIM:
        raise DimensionError(
            f"expected {OBJECT_DIM} object probabilities, got {values.size}"
        )
    if values.min() < 0.0:
        raise DomainError(
            f"object probabilities must be >= 0, found {values.min()}"
        )
    total = values.sum()
    if abs(total - 1.0) > OBJECT_SUM_TOLERANCE:
        raise NormalizationError(
            f"object probabilities sum to {total:.6f}, expected 1 "
            f"+/- {OBJECT_SUM_TOLERANCE}"
        )
    return ObjectFeature(probs=values, source=source)


def load_object_feature(path, source: str = "other") -> ObjectFeature:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_object_feature(fh.read(), source)


def save_object_feature(feature: ObjectFeature, path) -> None:
    """Write probabilities one per line with full round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for value in feature.probs:
            fh.write(f"{float(value)!r}\n")


def decode_semantic_map(data: bytes) -> SemanticMap:
    """Decode a single-channel 8-bit PNG or PGM into a SemanticMap."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format not in ("PNG", "PPM"):
                raise FormatError(f"unsupported semantic map format: {img.format}")
            if img.mode != "L":
                raise FormatError(
                    f"semantic map must be single-channel 8-bit, got mode {img.mode}"
                )
            labels = np.asarray(img, dtype=np.int64)
    except UnidentifiedImageError as exc:
        raise FormatError(f"not a decodable image stream: {exc}") from exc
    return SemanticMap(labels=labels)


def load_semantic_map(path) -> SemanticMap:
    with open(path, "rb") as fh:
        return decode_semantic_map(fh.read())


def semantic_histogram(semantic_map: SemanticMap) -> np.ndarray:
    """Coverage fraction per category: counts / total pixels, 150 values."""
    labels = semantic_map.labels
    if labels.size == 0:
        raise ValueError("cannot histogram an empty semantic map")
    counts = np.bincount(labels.ravel(), minlength=SEMANTIC_CATEGORIES)
    return counts / labels.size
