"""Dataset ingestion and splitting.

Loaders for the UCI-HAR archive layout (561-feature files and the
9-channel inertial signal files), the WISDM raw accelerometer text
format, a small ARFF subset (numeric attributes plus one nominal class
attribute), and the scores-CSV exchange format used to fuse externally
produced classifier outputs. Every loader either returns fully
validated data or raises a descriptive error.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fusekit.classifiers import LabeledDataset
from fusekit.errors import (
    CalibrationError,
    DataFormatError,
    IntegrityError,
    InvalidConfigError,
    ParseQualityError,
    SchemaError,
    ShapeError,
    StratificationError,
)
from fusekit.fusion import ROW_SUM_TOL, ScoreMatrix
from fusekit.preprocessing import MultiChannelWindow

UCIHAR_CLASS_NAMES = (
    "WALKING",
    "WALKING_UPSTAIRS",
    "WALKING_DOWNSTAIRS",
    "SITTING",
    "STANDING",
    "LAYING",
)

# 9 channels: body acc x/y/z, total acc x/y/z, body gyro x/y/z.
UCIHAR_SIGNALS = (
    "body_acc_x",
    "body_acc_y",
    "body_acc_z",
    "total_acc_x",
    "total_acc_y",
    "total_acc_z",
    "body_gyro_x",
    "body_gyro_y",
    "body_gyro_z",
)

WISDM_ACTIVITIES = ("Walking", "Jogging", "Upstairs", "Downstairs", "Sitting", "Standing")

MALFORMED_LINE_LIMIT = 0.01
SCORES_ROW_TOL = 1e-4

DATASET_KINDS = (
    "ucihar_features",
    "ucihar_inertial",
    "wisdm_raw",
    "wisdm_arff",
    "scores_csv",
    "synthetic",
)


@dataclass(frozen=True)
class SplitSpec:
    """Fractional train/validation/test split, stratified by default.

    The validation fraction is carved out of the training portion.
    """

    train_fraction: float = 0.7
    validation_fraction_of_train: float = 0.10
    seed: int = 42
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidConfigError("train_fraction must lie in (0, 1)")
        if not 0.0 < self.validation_fraction_of_train < 1.0:
            raise InvalidConfigError("validation_fraction_of_train must lie in (0, 1)")
        if self.seed < 0:
            raise InvalidConfigError("seed must be non-negative")


@dataclass(frozen=True)
class DatasetDescriptor:
    """Which dataset to load, from where, and how to split it."""

    kind: str
    root_path: str = ""
    split: str = "fractional"  # "paper" uses the archive's fixed split
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise InvalidConfigError(
                f"unknown dataset kind {self.kind!r}; expected one of {DATASET_KINDS}"
            )
        if self.split not in ("paper", "fractional"):
            raise InvalidConfigError("split must be 'paper' or 'fractional'")


@dataclass(frozen=True)
class WisdmRaw:
    """Parsed raw accelerometer stream plus parse-quality counters."""

    users: np.ndarray
    labels: np.ndarray
    timestamps: np.ndarray
    xyz: np.ndarray
    class_names: tuple[str, ...]
    accepted: int
    skipped_malformed: int
    skipped_blank: int


@dataclass(frozen=True)
class ArffData:
    """Numeric ARFF payload; missing values are NaN until imputation."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...]
    relation: str


def _load_matrix(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataFormatError(f"missing dataset file: {path}")
    try:
        data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DataFormatError(f"{path}: cannot parse numeric matrix: {exc}") from exc
    return data


def _ucihar_class_names(root: Path) -> tuple[str, ...]:
    labels_file = root / "activity_labels.txt"
    if not labels_file.is_file():
        return UCIHAR_CLASS_NAMES
    names = {}
    for line in labels_file.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        idx, name = line.split(None, 1)
        names[int(idx)] = name.strip()
    return tuple(names[i] for i in sorted(names))


def load_ucihar(root, variant: str = "features", split: str = "train"):
    """Load one split of the UCI-HAR archive.

    variant 'features' returns a LabeledDataset of the preprocessed
    feature vectors; 'inertial' returns (windows, labels, class_names)
    where each window is a 9 x 128 MultiChannelWindow. Labels are
    converted from the archive's 1-based indices to 0-based.
    """
    root = Path(root)
    if variant not in ("features", "inertial"):
        raise InvalidConfigError(f"unknown UCI-HAR variant: {variant!r}")
    if split not in ("train", "test"):
        raise InvalidConfigError(f"unknown split: {split!r}")
    class_names = _ucihar_class_names(root)
    y = _load_matrix(root / split / f"y_{split}.txt").ravel().astype(np.int64)
    if y.size and (y.min() < 1 or y.max() > len(class_names)):
        raise IntegrityError(
            f"{root / split / f'y_{split}.txt'}: labels outside 1..{len(class_names)}"
        )
    labels = y - 1
    if variant == "features":
        X = _load_matrix(root / split / f"X_{split}.txt")
        if X.shape[0] != labels.shape[0]:
            raise IntegrityError(
                f"{split}: X has {X.shape[0]} rows but y has {labels.shape[0]}"
            )
        return LabeledDataset(features=X, labels=labels, class_names=class_names)
    signal_dir = root / split / "Inertial Signals"
    channels = []
    for signal in UCIHAR_SIGNALS:
        data = _load_matrix(signal_dir / f"{signal}_{split}.txt")
        if data.shape[0] != labels.shape[0]:
            raise IntegrityError(
                f"{signal}_{split}.txt: {data.shape[0]} rows but y has {labels.shape[0]}"
            )
        channels.append(data)
    stacked = np.stack(channels, axis=1)  # n x 9 x w
    windows = [MultiChannelWindow(values=stacked[i]) for i in range(stacked.shape[0])]
    return windows, labels, class_names


def load_wisdm_raw(path) -> WisdmRaw:
    """Parse the WISDM raw stream: lines of "user,activity,timestamp,x,y,z;".

    A trailing semicolon is tolerated; blank and malformed lines are
    counted and skipped with one summary warning. More than 1% malformed
    (of non-blank lines) raises ParseQualityError; an unknown activity
    name is an immediate error naming the label.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"missing dataset file: {path}")
    label_index = {name: i for i, name in enumerate(WISDM_ACTIVITIES)}
    users, labels, timestamps, coords = [], [], [], []
    skipped_malformed = 0
    skipped_blank = 0
    non_blank = 0
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                skipped_blank += 1
                continue
            non_blank += 1
            if line.endswith(";"):
                line = line[:-1].rstrip()
            if ";" in line or not line:
                skipped_malformed += 1
                continue
            parts = line.split(",")
            if len(parts) != 6:
                skipped_malformed += 1
                continue
            activity = parts[1].strip()
            if activity not in label_index:
                raise DataFormatError(
                    f"{path}: unknown activity label {activity!r}; "
                    f"expected one of {WISDM_ACTIVITIES}"
                )
            try:
                user = int(parts[0])
                timestamp = int(parts[2])
                x, y, z = (float(parts[i]) for i in (3, 4, 5))
            except ValueError:
                skipped_malformed += 1
                continue
            if not all(math.isfinite(v) for v in (x, y, z)):
                skipped_malformed += 1
                continue
            users.append(user)
            labels.append(label_index[activity])
            timestamps.append(timestamp)
            coords.append((x, y, z))
    if non_blank and skipped_malformed / non_blank > MALFORMED_LINE_LIMIT:
        raise ParseQualityError(
            f"{path}: {skipped_malformed} of {non_blank} lines malformed "
            f"(> {MALFORMED_LINE_LIMIT:.0%})"
        )
    if skipped_malformed or skipped_blank:
        warnings.warn(
            f"{path}: skipped {skipped_malformed} malformed and "
            f"{skipped_blank} blank line(s)",
            stacklevel=2,
        )
    return WisdmRaw(
        users=np.array(users, dtype=np.int64),
        labels=np.array(labels, dtype=np.int64),
        timestamps=np.array(timestamps, dtype=np.int64),
        xyz=np.array(coords, dtype=np.float64).reshape(-1, 3),
        class_names=WISDM_ACTIVITIES,
        accepted=len(users),
        skipped_malformed=skipped_malformed,
        skipped_blank=skipped_blank,
    )


def _split_nominal_values(spec: str) -> list[str]:
    return [v.strip().strip("'\"") for v in spec.strip()[1:-1].split(",")]


# Numeric attributes that are identifiers, not features.
ARFF_METADATA_NAMES = ("unique_id", "user")


def load_wisdm_arff(path) -> ArffData:
    """Parse a numeric-plus-nominal-class ARFF file.

    Numeric attributes become feature columns ('?' parses to NaN, to be
    imputed with training-split means later); the nominal attribute
    named 'class' (or the last nominal one) supplies labels. Attributes
    named UNIQUE_ID or user are identifier metadata and are excluded.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"missing dataset file: {path}")
    attributes = []  # (name, kind, nominal_values)
    relation = ""
    data_rows = []
    in_data = False
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data:
                lowered = line.lower()
                if lowered.startswith("@relation"):
                    relation = line.split(None, 1)[1].strip() if " " in line else ""
                elif lowered.startswith("@attribute"):
                    body = line.split(None, 1)[1].strip()
                    if body.startswith('"') or body.startswith("'"):
                        quote = body[0]
                        end = body.index(quote, 1)
                        name, type_spec = body[1:end], body[end + 1 :].strip()
                    else:
                        name, type_spec = body.split(None, 1)
                    if type_spec.startswith("{"):
                        attributes.append((name, "nominal", _split_nominal_values(type_spec)))
                    elif type_spec.lower() in ("numeric", "real", "integer"):
                        attributes.append((name, "numeric", None))
                    else:
                        raise SchemaError(
                            f"{path}:{lineno}: unsupported attribute type {type_spec!r}"
                        )
                elif lowered.startswith("@data"):
                    in_data = True
                continue
            data_rows.append((lineno, line))
    if not in_data:
        raise SchemaError(f"{path}: no @data section")
    nominal_idx = [i for i, (_, kind, _) in enumerate(attributes) if kind == "nominal"]
    if not nominal_idx:
        raise SchemaError(f"{path}: no nominal class attribute declared")
    class_idx = next(
        (i for i in nominal_idx if attributes[i][0].lower() == "class"), nominal_idx[-1]
    )
    class_values = attributes[class_idx][2]
    value_index = {v: i for i, v in enumerate(class_values)}
    feature_idx = [
        i
        for i, (name, kind, _) in enumerate(attributes)
        if kind == "numeric" and name.lower() not in ARFF_METADATA_NAMES
    ]
    features, labels = [], []
    for lineno, line in data_rows:
        cells = next(csv.reader([line]))
        if len(cells) != len(attributes):
            raise DataFormatError(
                f"{path}:{lineno}: expected {len(attributes)} values, got {len(cells)}"
            )
        raw_class = cells[class_idx].strip().strip("'\"")
        if raw_class == "?":
            raise DataFormatError(f"{path}:{lineno}: missing class value")
        if raw_class not in value_index:
            raise DataFormatError(
                f"{path}:{lineno}: class value {raw_class!r} not declared"
            )
        row = []
        for i in feature_idx:
            cell = cells[i].strip()
            if cell == "?":
                row.append(np.nan)
                continue
            try:
                row.append(float(cell))
            except ValueError as exc:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in numeric "
                    f"attribute {attributes[i][0]!r}"
                ) from exc
        features.append(row)
        labels.append(value_index[raw_class])
    return ArffData(
        features=np.array(features, dtype=np.float64).reshape(len(features), len(feature_idx)),
        labels=np.array(labels, dtype=np.int64),
        class_names=tuple(class_values),
        feature_names=tuple(attributes[i][0] for i in feature_idx),
        relation=relation,
    )


def mean_impute(features, fit_rows):
    """Fill NaNs with column means computed over fit_rows only.

    Returns (imputed copy, column means). All-NaN fit columns impute 0.
    """
    features = np.array(features, dtype=np.float64)
    fit = features[np.asarray(fit_rows)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
        means = np.nanmean(fit, axis=0)
    means = np.where(np.isfinite(means), means, 0.0)
    nan_rows, nan_cols = np.where(np.isnan(features))
    features[nan_rows, nan_cols] = means[nan_cols]
    return features, means


def save_scores_csv(scores, labels, path, class_names=None):
    """Write a score matrix with its true labels as CSV.

    Header "label,<class names...>"; one row per sample: the true-label
    index followed by the scores, written with repr so reloading is
    bit-exact.
    """
    if isinstance(scores, ScoreMatrix):
        values, names = scores.values, scores.class_names
    else:
        values = np.asarray(scores, dtype=np.float64)
        names = tuple(class_names) if class_names else tuple(
            f"class_{j}" for j in range(values.shape[1])
        )
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.shape[0] != values.shape[0]:
        raise ShapeError(
            f"{labels.shape[0]} labels for {values.shape[0]} score rows"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", *names])
        for label, row in zip(labels, values):
            writer.writerow([int(label), *(repr(float(v)) for v in row)])


def read_scores_file(path):
    """Raw read of a scores CSV: (matrix, labels, class_names), no
    simplex validation. Used for fused-score files, whose rows are
    legitimate scores but not probabilities.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"missing scores file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty scores file") from None
        if not header or header[0].strip().lower() != "label" or len(header) < 3:
            raise SchemaError(
                f"{path}: header must be 'label,<class names...>' with >= 2 classes"
            )
        class_names = tuple(h.strip() for h in header[1:])
        labels, rows = [], []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
                )
            try:
                labels.append(int(cells[0]))
                rows.append([float(v) for v in cells[1:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: no score rows")
    return (
        np.array(rows, dtype=np.float64),
        np.array(labels, dtype=np.int64),
        class_names,
    )


def load_scores_csv(path, renormalize=False):
    """Load a classifier scores CSV as (ScoreMatrix, labels).

    Row sums are validated to 1 +/- 1e-4. Rows outside that band raise
    CalibrationError naming the row unless renormalize is set. Rows
    inside the band but beyond the matrix contract's 1e-6 are divided by
    their sum so the returned matrix always honors its invariant.
    """
    values, labels, class_names = read_scores_file(path)
    sums = values.sum(axis=1)
    off = np.abs(sums - 1.0)
    if not renormalize and np.any(off > SCORES_ROW_TOL):
        bad = int(np.argmax(off > SCORES_ROW_TOL))
        raise CalibrationError(
            f"{path}: data row {bad + 1} sums to {sums[bad]!r}, outside "
            f"1 +/- {SCORES_ROW_TOL}; pass renormalize to rescale"
        )
    needs_fix = off > ROW_SUM_TOL
    if np.any(needs_fix):
        values = values.copy()
        values[needs_fix] = values[needs_fix] / sums[needs_fix, None]
    return ScoreMatrix(values=values, class_names=class_names), labels


def _largest_remainder(quotas, capacities, total):
    """Integer allocation: floor the quotas, then hand out the remaining
    units by largest fractional remainder (ties to the lowest index),
    never exceeding per-class capacity."""
    base = np.minimum(np.floor(quotas).astype(np.int64), capacities)
    leftover = int(total - base.sum())
    if leftover > 0:
        remainders = quotas - np.floor(quotas)
        order = sorted(
            range(len(quotas)), key=lambda k: (-remainders[k], k)
        )
        for k in order:
            if leftover == 0:
                break
            if base[k] < capacities[k]:
                base[k] += 1
                leftover -= 1
        # Second pass ignoring remainder order if capacity blocked some.
        for k in range(len(quotas)):
            if leftover == 0:
                break
            room = capacities[k] - base[k]
            take = min(room, leftover)
            base[k] += take
            leftover -= take
    return base


def split_indices(labels, spec: SplitSpec):
    """Deterministic (train, validation, test) index arrays.

    Global partition sizes come first (round(n * train_fraction), then
    round(pool * validation_fraction)); stratification allocates those
    sizes across classes by largest remainder, keeping every partition
    within one sample of the global per-class ratio.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if n == 0:
        raise ShapeError("cannot split an empty dataset")
    pool_target = int(round(n * spec.train_fraction))
    val_target = int(round(pool_target * spec.validation_fraction_of_train))
    rng = np.random.default_rng(spec.seed)
    if not spec.stratified:
        perm = rng.permutation(n)
        pool = perm[:pool_target]
        val = pool[:val_target]
        train = pool[val_target:]
        test = perm[pool_target:]
        return np.sort(train), np.sort(val), np.sort(test)
    classes = np.unique(labels)
    counts = np.array([(labels == k).sum() for k in classes])
    if np.any(counts < 3):
        small = classes[counts < 3]
        raise StratificationError(
            f"class(es) {small.tolist()} have fewer than 3 samples; "
            "stratified splitting needs at least 3 per class"
        )
    pool_alloc = _largest_remainder(counts * spec.train_fraction, counts, pool_target)
    val_alloc = _largest_remainder(
        pool_alloc * spec.validation_fraction_of_train, pool_alloc, val_target
    )
    train_parts, val_parts, test_parts = [], [], []
    for pos, k in enumerate(classes):
        members = np.where(labels == k)[0]
        members = members[rng.permutation(members.shape[0])]
        pool_k = members[: pool_alloc[pos]]
        test_parts.append(members[pool_alloc[pos] :])
        val_parts.append(pool_k[: val_alloc[pos]])
        train_parts.append(pool_k[val_alloc[pos] :])
    train = np.sort(np.concatenate(train_parts))
    val = np.sort(np.concatenate(val_parts))
    test = np.sort(np.concatenate(test_parts))
    return train, val, test


def carve_fraction(labels, fraction: float, seed: int, stratified: bool = True):
    """Carve round(n * fraction) indices out of a label array.

    Returns (kept, carved) sorted index arrays. Used to pull a
    validation slice out of an archive's fixed training split.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if n == 0:
        raise ShapeError("cannot carve from an empty label array")
    if not 0.0 <= fraction < 1.0:
        raise InvalidConfigError("carve fraction must lie in [0, 1)")
    target = int(round(n * fraction))
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[target:]), np.sort(perm[:target])
    classes = np.unique(labels)
    counts = np.array([(labels == k).sum() for k in classes])
    alloc = _largest_remainder(counts * fraction, counts, target)
    kept_parts, carved_parts = [], []
    for pos, k in enumerate(classes):
        members = np.where(labels == k)[0]
        members = members[rng.permutation(members.shape[0])]
        carved_parts.append(members[: alloc[pos]])
        kept_parts.append(members[alloc[pos] :])
    return (
        np.sort(np.concatenate(kept_parts)),
        np.sort(np.concatenate(carved_parts)),
    )


def split(data: LabeledDataset, spec: SplitSpec):
    """Split a LabeledDataset into (train, validation, test) datasets."""
    train_idx, val_idx, test_idx = split_indices(data.labels, spec)

    def take(idx):
        return LabeledDataset(
            features=data.features[idx],
            labels=data.labels[idx],
            class_names=data.class_names,
        )

    return take(train_idx), take(val_idx), take(test_idx)
