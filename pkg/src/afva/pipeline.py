"""Dataset manifests, feature assembly, standardization, and the binary
feature cache.

A manifest is JSON-lines, one record per line. Feature vectors are ordered
blocks concatenated in the canonical order (color, gist, lbp, object,
semantic); the total width is derived from the schema, never hard-coded.
Cache payloads are 32-bit floats, so matrices are rounded to that precision
when materialized and round trips are bit-exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from afva import color as color_mod
from afva import external, gist, lbp
from afva.errors import CorruptionError, DataError, FormatError
from afva.imaging import decode_file, to_gray

BLOCK_ORDER = ("color", "gist", "lbp", "object", "semantic")

CACHE_MAGIC = b"AFVA"
CACHE_VERSION = 1


@dataclass(frozen=True)
class VaLabel:
    """Continuous valence/arousal label, both in [1, 9]."""

    valence: float
    arousal: float

    def __post_init__(self):
        for name, value in (("valence", self.valence), ("arousal", self.arousal)):
            if not 1.0 <= value <= 9.0:
                raise ValueError(f"{name} must lie in [1, 9], got {value}")

    def axis(self, axis: str) -> float:
        if axis not in ("valence", "arousal"):
            raise ValueError(f"axis must be 'valence' or 'arousal', got {axis!r}")
        return self.valence if axis == "valence" else self.arousal


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    image_path: str | None = None
    object_feature_path: dict[str, str] = field(default_factory=dict)
    semantic_map_path: str | None = None
    label: VaLabel | None = None
    keyword: str = ""
    tags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "image_path": self.image_path,
            "object_feature_path": dict(self.object_feature_path),
            "semantic_map_path": self.semantic_map_path,
            "label": None
            if self.label is None
            else {"valence": self.label.valence, "arousal": self.label.arousal},
            "keyword": self.keyword,
            "tags": list(self.tags),
        }

    @staticmethod
    def from_json(obj: dict) -> "DatasetRecord":
        label = obj.get("label")
        return DatasetRecord(
            id=obj["id"],
            image_path=obj.get("image_path"),
            object_feature_path=dict(obj.get("object_feature_path") or {}),
            semantic_map_path=obj.get("semantic_map_path"),
            label=None
            if label is None
            else VaLabel(valence=label["valence"], arousal=label["arousal"]),
            keyword=obj.get("keyword", ""),
            tags=tuple(obj.get("tags") or ()),
        )


def read_manifest(path) -> list[DatasetRecord]:
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = DatasetRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError) as exc:
                raise FormatError(f"bad manifest line {line_no}: {exc}") from exc
            if record.id in seen:
                raise DataError(f"duplicate record id {record.id!r} in manifest")
            seen.add(record.id)
            records.append(record)
    return records


def write_manifest(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")


@dataclass(frozen=True)
class FeatureConfig:
    """Extraction knobs; defaults give the 26+512+59+1000+150 schema."""

    hsv_bins: tuple[int, int, int] = color_mod.DEFAULT_HSV_BINS
    gist_resolution: int = 128
    object_source: str = "vgg16"


@dataclass(frozen=True)
class FeatureVector:
    """Ordered named blocks; the total width is the sum of block lengths."""

    blocks: tuple[tuple[str, np.ndarray], ...]

    @property
    def total_dim(self) -> int:
        return sum(len(values) for _, values in self.blocks)

    @property
    def block_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.blocks)

    def concat(self) -> np.ndarray:
        values = np.concatenate([values for _, values in self.blocks])
        if not np.all(np.isfinite(values)):
            raise ValueError("feature vector contains non-finite values")
        return values

    def schema(self) -> tuple[tuple[str, int], ...]:
        return tuple((name, len(values)) for name, values in self.blocks)


def canonical_selection(selection) -> tuple[str, ...]:
    """Validate a block-name selection and return it in canonical order."""
    names = set(selection)
    if not names:
        raise ValueError("feature selection must not be empty")
    unknown = names - set(BLOCK_ORDER)
    if unknown:
        raise ValueError(f"unknown feature blocks: {sorted(unknown)}")
    return tuple(name for name in BLOCK_ORDER if name in names)


def assemble(
    record: DatasetRecord,
    selection,
    config: FeatureConfig = FeatureConfig(),
) -> FeatureVector:
    """Extract or load exactly the selected blocks, in canonical order.

    Missing files raise OSError naming the block; validation failures from
    the loaders bubble up unchanged.
    """
    ordered = canonical_selection(selection)

    img = None
    if any(name in ("color", "gist", "lbp") for name in ordered):
        if record.image_path is None:
            raise DataError(f"record {record.id!r} has no image_path")
        try:
            img = decode_file(record.image_path)
        except OSError as exc:
            raise OSError(
                f"record {record.id!r}: cannot read image for blocks "
                f"{ordered}: {exc}"
            ) from exc

    blocks = []
    for name in ordered:
        if name == "color":
            values = color_mod.color_block(img, config.hsv_bins).concat()
        elif name == "gist":
            bank = gist.cached_bank(config.gist_resolution)
            values = gist.gist(to_gray(img), bank)
        elif name == "lbp":
            values = lbp.lbp(to_gray(img))
        elif name == "object":
            path = record.object_feature_path.get(config.object_source)
            if path is None:
                raise DataError(
                    f"record {record.id!r} has no object feature for source "
                    f"{config.object_source!r}"
                )
            try:
                values = external.load_object_feature(
                    path, source=config.object_source
                ).probs
            except OSError as exc:
                raise OSError(
                    f"record {record.id!r}: cannot read object block: {exc}"
                ) from exc
        else:  # semantic
            if record.semantic_map_path is None:
                raise DataError(f"record {record.id!r} has no semantic_map_path")
            try:
                semantic_map = external.load_semantic_map(record.semantic_map_path)
            except OSError as exc:
                raise OSError(
                    f"record {record.id!r}: cannot read semantic block: {exc}"
                ) from exc
            values = external.semantic_histogram(semantic_map)
        blocks.append((name, np.asarray(values, dtype=np.float64)))
    return FeatureVector(blocks=tuple(blocks))


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-major feature rows plus aligned record ids and optional labels.

    Values are float64 in memory but quantized to float32 precision (the
    cache payload type), so write -> read round trips are lossless.
    """

    values: np.ndarray
    ids: tuple[str, ...]
    schema: tuple[tuple[str, int], ...]
    labels: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature matrix contains non-finite values")
        if values.shape[0] != len(self.ids):
            raise ValueError("row count does not match id count")
        if values.shape[1] != sum(length for _, length in self.schema):
            raise ValueError("matrix width does not match the block schema")
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def targets(self, axis: str) -> np.ndarray:
        if self.labels is None or axis not in self.labels:
            raise DataError(f"matrix carries no {axis!r} labels")
        return self.labels[axis]


def materialize(
    records,
    selection,
    config: FeatureConfig = FeatureConfig(),
) -> FeatureMatrix:
    """Assemble features for every record into one matrix.

    Rows follow the record order; labels are attached when every record has
    one. Values are rounded to float32 precision to match the cache payload.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot materialize an empty record list")
    rows = []
    schema = None
    for record in records:
        vector = assemble(record, selection, config)
        if schema is None:
            schema = vector.schema()
        elif vector.schema() != schema:
            raise DataError(f"record {record.id!r} produced a different schema")
        rows.append(vector.concat())
    values = np.vstack(rows).astype(np.float32).astype(np.float64)

    labels = None
    if all(record.label is not None for record in records):
        labels = {
            "valence": np.array([r.label.valence for r in records]),
            "arousal": np.array([r.label.arousal for r in records]),
        }
    return FeatureMatrix(
        values=values,
        ids=tuple(record.id for record in records),
        schema=schema,
        labels=labels,
    )


def standardize(
    matrix: FeatureMatrix,
) -> tuple[FeatureMatrix, tuple[np.ndarray, np.ndarray]]:
    """Shift/scale each column to mean 0, std 1.

    Zero-variance columns pass through unchanged with std recorded as 1, so
    the (mean, std) pair can transform held-out rows without surprises.
    """
    if matrix.n_rows < 2:
        raise ValueError("standardization needs at least 2 rows")
    mean = matrix.values.mean(axis=0)
    std = matrix.values.std(axis=0)
    constant = std == 0.0
    mean = np.where(constant, 0.0, mean)
    std = np.where(constant, 1.0, std)
    transformed = apply_standardization(matrix.values, (mean, std))
    return (
        FeatureMatrix(
            values=transformed, ids=matrix.ids, schema=matrix.schema,
            labels=matrix.labels,
        ),
        (mean, std),
    )


def apply_standardization(values: np.ndarray, stats) -> np.ndarray:
    mean, std = stats
    return (values - mean) / std


def unstandardize(values: np.ndarray, stats) -> np.ndarray:
    mean, std = stats
    return values * std + mean


def cache_write(matrix: FeatureMatrix, path) -> None:
    """Binary layout: magic, version, length-prefixed JSON header (schema,
    row count, ids, labels), then row-major float32 little-endian values."""
    header = {
        "schema": [[name, length] for name, length in matrix.schema],
        "n_rows": matrix.n_rows,
        "dim": matrix.dim,
        "ids": list(matrix.ids),
        "labels": None
        if matrix.labels is None
        else {axis: values.tolist() for axis, values in matrix.labels.items()},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = matrix.values.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<II", CACHE_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def cache_read(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != CACHE_MAGIC:
        raise FormatError(f"{path}: not a feature cache (bad magic)")
    version, header_len = struct.unpack("<II", data[4:12])
    if version != CACHE_VERSION:
        raise FormatError(f"{path}: unsupported cache version {version}")
    if len(data) < 12 + header_len:
        raise CorruptionError(f"{path}: truncated header")
    try:
        header = json.loads(data[12 : 12 + header_len])
    except json.JSONDecodeError as exc:
        raise CorruptionError(f"{path}: unreadable header: {exc}") from exc
    n_rows, dim = header["n_rows"], header["dim"]
    payload = data[12 + header_len :]
    expected = n_rows * dim * 4
    if len(payload) != expected:
        raise CorruptionError(
            f"{path}: payload holds {len(payload)} bytes, header claims {expected}"
        )
    values = (
        np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n_rows, dim)
    )
    labels = header.get("labels")
    return FeatureMatrix(
        values=values,
        ids=tuple(header["ids"]),
        schema=tuple((name, length) for name, length in header["schema"]),
        labels=None
        if labels is None
        else {axis: np.array(vals) for axis, vals in labels.items()},
    )


def attach_labels(records, labels: dict[str, VaLabel]) -> list[DatasetRecord]:
    """Return records with labels filled in from an id -> VaLabel map."""
    return [
        replace(record, label=labels[record.id]) if record.id in labels else record
        for record in records
    ]
