"""Evaluation protocol and analyses: k-fold cross-validation with per-fold
MSE, a ridge-stabilized linear baseline, Pearson correlation utilities, the
word-emotion correlation study, the 4x4 valence-arousal word grid, and the
2-D label-distribution export.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from afva import network, pipeline
from afva.errors import DataError, FormatError

GRID_BOUNDS = (1.0, 3.0, 5.0, 7.0, 9.0)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: dict[str, int]

    def fold_ids(self, fold: int) -> list[str]:
        return [i for i, f in self.assignments.items() if f == fold]


def make_folds(ids, k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded shuffle then round-robin assignment; fold sizes differ by <= 1."""
    ids = list(ids)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds the {len(ids)} available ids")
    if len(set(ids)) != len(ids):
        raise ValueError("ids must be unique")
    order = np.random.default_rng(seed).permutation(len(ids))
    assignments = {ids[row]: int(pos % k) for pos, row in enumerate(order)}
    return FoldPlan(k=k, assignments=assignments)


@dataclass(frozen=True)
class FoldResult:
    fold: int
    train_mse: float
    test_mse: float
    n_train: int
    n_test: int


@dataclass(frozen=True)
class CvReport:
    axis: str
    selection: tuple[str, ...]
    k: int
    seed: int
    folds: tuple[FoldResult, ...]
    avg_train_mse: float
    avg_test_mse: float

    def to_json(self) -> dict:
        return {
            "axis": self.axis,
            "selection": list(self.selection),
            "k": self.k,
            "seed": self.seed,
            "folds": [
                {
                    "fold": f.fold,
                    "train_mse": f.train_mse,
                    "test_mse": f.test_mse,
                    "n_train": f.n_train,
                    "n_test": f.n_test,
                }
                for f in self.folds
            ],
            "avg_train_mse": self.avg_train_mse,
            "avg_test_mse": self.avg_test_mse,
        }


def cross_validate(
    matrix: pipeline.FeatureMatrix,
    axis: str,
    config: network.TrainConfig = network.TrainConfig(),
    k: int = 5,
    seed: int = 0,
    hidden_dims=network.DEFAULT_HIDDEN_DIMS,
    standardize: bool = True,
    val_fraction: float = 0.1,
    selection: tuple[str, ...] = (),
) -> CvReport:
    """Train and score one network per fold; every row is tested exactly once.

    Standardization statistics are fit on each fold's training rows only.
    Per-sample MSE is reported for both splits; the summed loss remains the
    training objective.
    """
    targets = matrix.targets(axis)
    plan = make_folds(matrix.ids, k=k, seed=seed)
    row_fold = np.array([plan.assignments[i] for i in matrix.ids])
    fold_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(k)]

    results = []
    for fold in range(k):
        test_mask = row_fold == fold
        x_train, y_train = matrix.values[~test_mask], targets[~test_mask]
        x_test, y_test = matrix.values[test_mask], targets[test_mask]
        if standardize:
            raw_std = x_train.std(axis=0)
            constant = raw_std == 0.0
            mean = np.where(constant, 0.0, x_train.mean(axis=0))
            std = np.where(constant, 1.0, raw_std)
            x_train = (x_train - mean) / std
            x_test = (x_test - mean) / std

        dims = (x_train.shape[1], *hidden_dims, 1)
        fold_config = replace(config, seed=fold_seeds[fold])
        net = network.init(dims, seed=fold_seeds[fold], axis=axis)
        net, _ = network.train(net, x_train, y_train, fold_config, val_fraction)
        results.append(
            FoldResult(
                fold=fold,
                train_mse=float(np.mean((network.predict(net, x_train) - y_train) ** 2)),
                test_mse=float(np.mean((network.predict(net, x_test) - y_test) ** 2)),
                n_train=int(x_train.shape[0]),
                n_test=int(x_test.shape[0]),
            )
        )

    return CvReport(
        axis=axis,
        selection=tuple(selection),
        k=k,
        seed=seed,
        folds=tuple(results),
        avg_train_mse=float(np.mean([r.train_mse for r in results])),
        avg_test_mse=float(np.mean([r.test_mse for r in results])),
    )


def run_cv(
    records,
    selection,
    axis: str,
    config: network.TrainConfig = network.TrainConfig(),
    k: int = 5,
    seed: int = 0,
    feature_config: pipeline.FeatureConfig = pipeline.FeatureConfig(),
    hidden_dims=network.DEFAULT_HIDDEN_DIMS,
    standardize: bool = True,
    val_fraction: float = 0.1,
) -> CvReport:
    """Assemble features from records, then cross-validate."""
    records = list(records)
    unlabeled = [r.id for r in records if r.label is None]
    if unlabeled:
        raise DataError(f"records without labels: {unlabeled[:5]}")
    ordered = pipeline.canonical_selection(selection)
    matrix = pipeline.materialize(records, ordered, feature_config)
    return cross_validate(
        matrix,
        axis,
        config=config,
        k=k,
        seed=seed,
        hidden_dims=hidden_dims,
        standardize=standardize,
        val_fraction=val_fraction,
        selection=ordered,
    )


def linear_baseline(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_test: np.ndarray,
    ridge: float = 1e-6,
) -> np.ndarray:
    """Least squares with an intercept and a small ridge term for rank
    safety, solved in closed form from the normal equations."""
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64).ravel()
    x_test = np.asarray(x_test, dtype=np.float64)
    a = np.hstack([x_train, np.ones((x_train.shape[0], 1))])
    gram = a.T @ a + ridge * np.eye(a.shape[1])
    try:
        coef = np.linalg.solve(gram, a.T @ y_train)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"normal equations are singular (ridge={ridge}): {exc}"
        ) from exc
    return np.hstack([x_test, np.ones((x_test.shape[0], 1))]) @ coef


def pearson(x, y) -> float:
    """Sample correlation coefficient; undefined for constant inputs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if x.size < 2:
        raise ValueError("correlation needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt((dx**2).sum())
    sy = np.sqrt((dy**2).sum())
    if sx == 0.0 or sy == 0.0:
        raise DataError("correlation is undefined for constant input")
    return float((dx @ dy) / (sx * sy))


@dataclass(frozen=True)
class WordEmotionEntry:
    word: str
    valence: float
    arousal: float

    def __post_init__(self):
        for name, value in (("valence", self.valence), ("arousal", self.arousal)):
            if not 1.0 <= value <= 9.0:
                raise ValueError(f"{name} must lie in [1, 9], got {value}")


def load_word_dictionary(path) -> dict[str, WordEmotionEntry]:
    """Delimited text `word,valence,arousal` with a required header row."""
    entries: dict[str, WordEmotionEntry] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != [
            "word",
            "valence",
            "arousal",
        ]:
            raise FormatError(
                f"{path}: expected header 'word,valence,arousal', got {header}"
            )
        for row in reader:
            if not row:
                continue
            word = row[0].strip().casefold()
            if word in entries:
                raise DataError(f"{path}: duplicate word {word!r}")
            entries[word] = WordEmotionEntry(
                word=word, valence=float(row[1]), arousal=float(row[2])
            )
    return entries


def object_emotion_correlation(
    records, dictionary: dict[str, WordEmotionEntry]
) -> tuple[float, float, int]:
    """Correlate image labels with the emotion values of their object words.

    Each record's keyword is joined to the dictionary by case-folded exact
    match; unmatched or unlabeled records are excluded from the correlation.
    Returns (r_valence, r_arousal, n_matched).
    """
    word_v, word_a, img_v, img_a = [], [], [], []
    for record in records:
        if record.label is None:
            continue
        entry = dictionary.get(record.keyword.strip().casefold())
        if entry is None:
            continue
        word_v.append(entry.valence)
        word_a.append(entry.arousal)
        img_v.append(record.label.valence)
        img_a.append(record.label.arousal)
    if not word_v:
        raise DataError("no records matched the word dictionary")
    return (
        pearson(word_v, img_v),
        pearson(word_a, img_a),
        len(word_v),
    )


def _grid_cell(value: float) -> int:
    """Half-open cells [1,3), [3,5), [5,7), and the closed top cell [7,9]."""
    for cell in range(3):
        if value < GRID_BOUNDS[cell + 1]:
            return cell
    return 3


def va_grid_words(records) -> list[list[list[tuple[str, int]]]]:
    """4x4 grid of (word, count) lists, cells indexed [valence][arousal].

    Words come from record tags; within a cell they are ranked by frequency,
    ties alphabetical. Unlabeled records are skipped.
    """
    counters = [[Counter() for _ in range(4)] for _ in range(4)]
    for record in records:
        if record.label is None:
            continue
        cell_v = _grid_cell(record.label.valence)
        cell_a = _grid_cell(record.label.arousal)
        counters[cell_v][cell_a].update(record.tags)
    return [
        [
            sorted(counter.items(), key=lambda item: (-item[1], item[0]))
            for counter in row
        ]
        for row in counters
    ]


def export_va_distribution(records, bins: int = 8) -> np.ndarray:
    """Counts over a bins x bins grid on [1, 9]^2, valence rows by arousal
    columns; the top edge falls in the last bin."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    table = np.zeros((bins, bins), dtype=np.int64)
    for record in records:
        if record.label is None:
            continue
        row = min(int((record.label.valence - 1.0) / 8.0 * bins), bins - 1)
        col = min(int((record.label.arousal - 1.0) / 8.0 * bins), bins - 1)
        table[row, col] += 1
    return table


def write_distribution_csv(table: np.ndarray, path) -> None:
    bins = table.shape[0]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["valence_bin", "arousal_bin", "count"])
        for row in range(bins):
            for col in range(bins):
                writer.writerow([row, col, int(table[row, col])])


def write_grid_csv(grid, path, top: int = 10) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["valence_cell", "arousal_cell", "rank", "word", "count"])
        for cell_v in range(4):
            for cell_a in range(4):
                for rank, (word, count) in enumerate(grid[cell_v][cell_a][:top]):
                    writer.writerow([cell_v, cell_a, rank, word, count])


def write_report_json(report: CvReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
