"""Metrics, confusion matrices, and comparison tables.

Accuracy is reported as a percent, F1 is always the macro variant (the
unweighted per-class mean), and tables follow the rows-are-methods,
Acc/F1-columns-per-dataset layout used in the published full-scale
results, formatted to one decimal place.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field

import numpy as np

from fusekit.errors import InvalidInputError, ShapeError

# Published full-scale accuracy / macro-F1 percentages for the same
# methods, kept for side-by-side context when rendering tables. The
# desk-scale classifiers shipped here are stand-ins, so these numbers
# are context, not targets.
REFERENCE_RESULTS = {
    "UCI-HAR": {
        "CNN": (91.9, 91.0),
        "RCN": (93.8, 93.7),
        "SVM": (96.0, 96.0),
        "Score Fusion": (94.0, 94.0),
        "Weighted Score Fusion": (94.7, 94.8),
        "Entropy Weighted Score Fusion": (96.4, 96.3),
        "Entropy Weighted Score Fusion (RCN + SVM)": (97.4, 97.4),
    },
    "WISDM": {
        "CNN": (81.7, 81.5),
        "RCN": (94.0, 92.3),
        "SVM": (82.0, 81.0),
        "Score Fusion": (86.0, 84.0),
        "Weighted Score Fusion": (88.7, 86.7),
        "Entropy Weighted Score Fusion": (89.5, 89.4),
        "Entropy Weighted Score Fusion (RCN + SVM)": (91.5, 91.0),
    },
}

# Which built-in classifier stands in for which full-scale model in
# the reference table (chosen by rough role, not architecture).
STAND_IN_FOR = {
    "softmax": "SVM",
    "naive_bayes": "CNN",
    "mlp": "RCN",
}


@dataclass(frozen=True)
class ConfusionMatrix:
    """c x c count matrix; rows are true classes, columns predictions."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        names = tuple(str(n) for n in self.class_names)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ShapeError(f"confusion matrix must be square, got {counts.shape}")
        if counts.shape[0] != len(names):
            raise ShapeError(
                f"{counts.shape[0]} classes but {len(names)} class names"
            )
        if np.any(counts < 0):
            raise InvalidInputError("confusion counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", names)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        """Percent correct: 100 * trace / total."""
        return 100.0 * int(np.trace(self.counts)) / self.total


def confusion(true_labels, predicted_labels, class_names) -> ConfusionMatrix:
    """Count (true, predicted) pairs into a ConfusionMatrix.

    class_names may be a tuple of names or an integer class count.
    """
    if isinstance(class_names, int):
        class_names = tuple(f"class_{j}" for j in range(class_names))
    true_labels = np.asarray(true_labels, dtype=np.int64).ravel()
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64).ravel()
    if true_labels.shape[0] != predicted_labels.shape[0]:
        raise ShapeError(
            f"{true_labels.shape[0]} true labels vs "
            f"{predicted_labels.shape[0]} predictions"
        )
    if true_labels.shape[0] == 0:
        raise InvalidInputError("cannot build a confusion matrix from zero samples")
    c = len(class_names)
    for name, arr in (("true", true_labels), ("predicted", predicted_labels)):
        if arr.min() < 0 or arr.max() >= c:
            raise InvalidInputError(
                f"{name} labels must lie in [0, {c}), got "
                f"[{arr.min()}, {arr.max()}]"
            )
    counts = np.bincount(true_labels * c + predicted_labels, minlength=c * c)
    return ConfusionMatrix(counts=counts.reshape(c, c), class_names=tuple(class_names))


def per_class_recall(cm: ConfusionMatrix) -> np.ndarray:
    """Percent recall per class; a class with no true samples scores 0."""
    counts = cm.counts
    support = counts.sum(axis=1)
    recall = np.zeros(cm.n_classes, dtype=np.float64)
    nonzero = support > 0
    recall[nonzero] = 100.0 * np.diag(counts)[nonzero] / support[nonzero]
    return recall


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean of per-class F1, as a percent.

    Precision or recall with an empty denominator counts as 0, and a
    class where precision + recall = 0 contributes an F1 of 0.
    """
    counts = cm.counts.astype(np.float64)
    diag = np.diag(counts)
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    f1 = np.zeros(cm.n_classes, dtype=np.float64)
    for k in range(cm.n_classes):
        precision = diag[k] / col[k] if col[k] > 0 else 0.0
        recall = diag[k] / row[k] if row[k] > 0 else 0.0
        if precision + recall > 0:
            f1[k] = 2.0 * precision * recall / (precision + recall)
    return 100.0 * float(f1.mean())


@dataclass(frozen=True)
class EvaluationReport:
    """One method's metrics on one dataset."""

    method: str
    accuracy: float
    macro_f1: float
    per_class_recall: tuple[float, ...]
    confusion: ConfusionMatrix
    weights: tuple[float, ...] | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        values = (self.accuracy, self.macro_f1, *self.per_class_recall)
        if any(not 0.0 <= v <= 100.0 for v in values):
            raise InvalidInputError("percent metrics must lie in [0, 100]")
        object.__setattr__(
            self, "per_class_recall", tuple(float(r) for r in self.per_class_recall)
        )
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))


def evaluate_predictions(
    method, true_labels, predicted_labels, class_names, weights=None, config=None
) -> EvaluationReport:
    """Build a full report from labels and predictions."""
    cm = confusion(true_labels, predicted_labels, class_names)
    return EvaluationReport(
        method=method,
        accuracy=cm.accuracy,
        macro_f1=macro_f1(cm),
        per_class_recall=tuple(per_class_recall(cm)),
        confusion=cm,
        weights=weights,
        config=dict(config) if config else {},
    )


def render_report(report: EvaluationReport) -> str:
    """Plain-text block for one report (F1 is macro, stated in the header)."""
    lines = [
        f"method: {report.method}",
        f"accuracy: {report.accuracy:.1f}%",
        f"macro F1: {report.macro_f1:.1f}%",
    ]
    if report.weights is not None:
        lines.append("weights: " + ", ".join(f"{w:.6f}" for w in report.weights))
    for key in sorted(report.config):
        lines.append(f"{key}: {report.config[key]}")
    lines.append("per-class recall:")
    cm = report.confusion
    for name, recall in zip(cm.class_names, report.per_class_recall):
        lines.append(f"  {name}: {recall:.1f}%")
    lines.append("confusion (rows true, columns predicted):")
    width = max(
        [len(n) for n in cm.class_names] + [len(str(int(cm.counts.max())))]
    )
    header = " " * (width + 2) + " ".join(f"{n:>{width}}" for n in cm.class_names)
    lines.append(header)
    for name, row in zip(cm.class_names, cm.counts):
        cells = " ".join(f"{int(v):>{width}}" for v in row)
        lines.append(f"  {name:>{width}} {cells}")
    return "\n".join(lines) + "\n"


def confusion_csv(cm: ConfusionMatrix) -> str:
    """Confusion matrix as CSV with class-name header and row labels."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["true\\predicted", *cm.class_names])
    for name, row in zip(cm.class_names, cm.counts):
        writer.writerow([name, *(int(v) for v in row)])
    return buf.getvalue()


def _normalize_reports(reports):
    """Accept a flat report list (one unnamed dataset) or an ordered
    {dataset name: [reports]} mapping; return the mapping form."""
    if isinstance(reports, dict):
        named = {str(k): list(v) for k, v in reports.items()}
    else:
        named = {"results": list(reports)}
    if not any(named.values()):
        raise InvalidInputError("comparison table needs at least one report")
    return named


def comparison_table(reports, reference=None):
    """Render method-by-dataset Acc/F1 columns as (text, csv) strings.

    reports: list of EvaluationReport, or {dataset: [reports]} for a
    multi-dataset table. reference: optional {dataset: {method: (acc,
    f1)}} of plain numbers (e.g. REFERENCE_RESULTS) rendered through the
    same formatter. Every percentage is printed with one decimal.
    """
    if reports:
        named = _normalize_reports(reports)
        columns = list(named)
        rows = {}
        for dataset, dataset_reports in named.items():
            for rep in dataset_reports:
                rows.setdefault(rep.method, {})[dataset] = (rep.accuracy, rep.macro_f1)
    elif reference:
        columns = list(reference)
        rows = {}
    else:
        raise InvalidInputError("comparison table needs at least one report")
    if reference:
        for dataset, methods in reference.items():
            if dataset not in columns:
                columns.append(dataset)
            for method, (acc, f1) in methods.items():
                rows.setdefault(method, {})[dataset] = (float(acc), float(f1))

    header = ["method"]
    for dataset in columns:
        header += [f"{dataset} acc", f"{dataset} f1"]
    table_rows = []
    for method, cells in rows.items():
        row = [method]
        for dataset in columns:
            if dataset in cells:
                acc, f1 = cells[dataset]
                row += [f"{acc:.1f}", f"{f1:.1f}"]
            else:
                row += ["-", "-"]
        table_rows.append(row)

    widths = [
        max(len(header[i]), *(len(r[i]) for r in table_rows)) if table_rows else len(header[i])
        for i in range(len(header))
    ]
    def fmt(row):
        first = f"{row[0]:<{widths[0]}}"
        rest = "  ".join(f"{cell:>{widths[i + 1]}}" for i, cell in enumerate(row[1:]))
        return (first + "  " + rest).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    text = "\n".join([fmt(header), rule, *(fmt(r) for r in table_rows)]) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(table_rows)
    return text, buf.getvalue()
