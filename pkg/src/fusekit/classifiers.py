"""Lightweight deterministic classifiers used to exercise the fusion
pipeline end to end: multinomial softmax regression, Gaussian naive
Bayes, and a one-hidden-layer ReLU MLP.

All three are probability-calibrated (predict_proba rows sum to 1),
train with plain full-batch gradient descent where applicable, and are
bit-reproducible given the same data and seed. Models round-trip
through a small versioned binary blob (magic "FKMODEL1").
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from fusekit.errors import (
    DataFormatError,
    InvalidConfigError,
    InvalidInputError,
    ShapeError,
)
from fusekit.fusion import ScoreMatrix

KINDS = ("softmax", "naive_bayes", "mlp")

MODEL_MAGIC = b"FKMODEL1"
PROB_FLOOR = 1e-12
NB_VAR_FLOOR = 1e-6


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with integer class labels and class names."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, order="C")
        labels = np.array(self.labels, dtype=np.int64).ravel()
        names = tuple(str(n) for n in self.class_names)
        if features.ndim != 2 or features.shape[0] != labels.shape[0]:
            raise ShapeError("features and labels must have matching row counts")
        if not np.all(np.isfinite(features)):
            raise InvalidInputError("dataset features contain non-finite values")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise InvalidInputError(
                f"labels must lie in [0, {len(names)}), got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    learning_rate: float = 0.1
    epochs: int = 300
    l2: float = 1e-4
    hidden_units: int = 64
    batch_size: int = 0  # 0 = full batch

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise InvalidConfigError("epochs must be at least 1")
        if self.seed < 0:
            raise InvalidConfigError("seed must be non-negative")


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    parameters: dict
    class_names: tuple[str, ...]
    validation_accuracy: float


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _one_hot(labels, c):
    out = np.zeros((labels.shape[0], c))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def softmax_loss_and_grad(params, X, Y, l2):
    """Cross-entropy loss and analytic gradients for softmax regression.

    Probabilities are clamped to [1e-12, 1] before the log. Exposed so
    the gradients can be checked against finite differences.
    """
    n = X.shape[0]
    probs = _softmax(X @ params["W"] + params["b"])
    clamped = np.clip(probs, PROB_FLOOR, 1.0)
    loss = -np.mean(np.sum(Y * np.log(clamped), axis=1))
    loss += 0.5 * l2 * float(np.sum(params["W"] ** 2))
    delta = (probs - Y) / n
    grads = {"W": X.T @ delta + l2 * params["W"], "b": delta.sum(axis=0)}
    return loss, grads


def mlp_loss_and_grad(params, X, Y, l2):
    """Loss and gradients for the one-hidden-layer ReLU network."""
    n = X.shape[0]
    pre = X @ params["W1"] + params["b1"]
    hidden = np.maximum(pre, 0.0)
    probs = _softmax(hidden @ params["W2"] + params["b2"])
    clamped = np.clip(probs, PROB_FLOOR, 1.0)
    loss = -np.mean(np.sum(Y * np.log(clamped), axis=1))
    loss += 0.5 * l2 * (float(np.sum(params["W1"] ** 2)) + float(np.sum(params["W2"] ** 2)))
    delta = (probs - Y) / n
    d_hidden = (delta @ params["W2"].T) * (pre > 0.0)
    grads = {
        "W1": X.T @ d_hidden + l2 * params["W1"],
        "b1": d_hidden.sum(axis=0),
        "W2": hidden.T @ delta + l2 * params["W2"],
        "b2": delta.sum(axis=0),
    }
    return loss, grads


def _batches(n, batch_size):
    if batch_size <= 0 or batch_size >= n:
        return [slice(0, n)]
    # Contiguous fixed-order slices keep training deterministic.
    return [slice(s, min(s + batch_size, n)) for s in range(0, n, batch_size)]


def _descend(params, loss_and_grad, X, Y, config):
    slices = _batches(X.shape[0], config.batch_size)
    for _ in range(config.epochs):
        for sl in slices:
            _, grads = loss_and_grad(params, X[sl], Y[sl], config.l2)
            for key in params:
                params[key] = params[key] - config.learning_rate * grads[key]
    return params


def _train_softmax(X, labels, c, config):
    params = {"W": np.zeros((X.shape[1], c)), "b": np.zeros(c)}
    return _descend(params, softmax_loss_and_grad, X, _one_hot(labels, c), config)


def _train_mlp(X, labels, c, config):
    rng = np.random.default_rng(config.seed)
    h = config.hidden_units
    params = {
        "W1": rng.normal(0.0, 1.0 / np.sqrt(X.shape[1]), size=(X.shape[1], h)),
        "b1": np.zeros(h),
        # Zero-initialized output layer keeps class columns exchangeable.
        "W2": np.zeros((h, c)),
        "b2": np.zeros(c),
    }
    return _descend(params, mlp_loss_and_grad, X, _one_hot(labels, c), config)


def _train_naive_bayes(X, labels, c, config):
    n, f = X.shape
    means = np.zeros((c, f))
    variances = np.zeros((c, f))
    priors = np.zeros(c)
    for k in range(c):
        members = X[labels == k]
        means[k] = members.mean(axis=0)
        variances[k] = np.maximum(members.var(axis=0), NB_VAR_FLOOR)
        priors[k] = members.shape[0] / n
    return {"means": means, "variances": variances, "log_priors": np.log(priors)}


_TRAINERS = {
    "softmax": _train_softmax,
    "naive_bayes": _train_naive_bayes,
    "mlp": _train_mlp,
}


def train(kind: str, data: LabeledDataset, config: TrainConfig, validation=None) -> TrainedModel:
    """Train one classifier; deterministic given (kind, data, config).

    validation is an optional (features, labels) pair; its accuracy is
    recorded on the model. Without one, training accuracy is recorded.
    The caller is responsible for carving the validation split.
    """
    if kind not in KINDS:
        raise InvalidConfigError(f"unknown classifier kind: {kind!r}")
    c = len(data.class_names)
    present = np.unique(data.labels)
    if present.size < 2:
        raise InvalidInputError(
            f"training data contains {present.size} class(es); need at least 2"
        )
    if kind == "naive_bayes" and present.size != c:
        raise InvalidInputError(
            "naive Bayes needs every class present in the training data"
        )
    params = _TRAINERS[kind](data.features, data.labels, c, config)
    model = TrainedModel(
        kind=kind,
        parameters=params,
        class_names=data.class_names,
        validation_accuracy=0.0,
    )
    if validation is not None:
        val_x, val_y = validation
        acc = accuracy(model, val_x, np.asarray(val_y))
    else:
        acc = accuracy(model, data.features, data.labels)
    return TrainedModel(
        kind=kind,
        parameters=params,
        class_names=data.class_names,
        validation_accuracy=float(acc),
    )


def predict_proba(model: TrainedModel, features) -> ScoreMatrix:
    """Class-probability matrix for a feature matrix, columns in class order."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError("features must be a 2-D matrix")
    p = model.parameters
    if model.kind == "softmax":
        if X.shape[1] != p["W"].shape[0]:
            raise ShapeError(
                f"feature width {X.shape[1]} does not match trained width {p['W'].shape[0]}"
            )
        probs = _softmax(X @ p["W"] + p["b"])
    elif model.kind == "mlp":
        if X.shape[1] != p["W1"].shape[0]:
            raise ShapeError(
                f"feature width {X.shape[1]} does not match trained width {p['W1'].shape[0]}"
            )
        hidden = np.maximum(X @ p["W1"] + p["b1"], 0.0)
        probs = _softmax(hidden @ p["W2"] + p["b2"])
    elif model.kind == "naive_bayes":
        if X.shape[1] != p["means"].shape[1]:
            raise ShapeError(
                f"feature width {X.shape[1]} does not match trained width {p['means'].shape[1]}"
            )
        log_post = np.empty((X.shape[0], p["means"].shape[0]))
        for k in range(p["means"].shape[0]):
            diff = X - p["means"][k]
            log_like = -0.5 * np.sum(
                diff ** 2 / p["variances"][k] + np.log(2.0 * np.pi * p["variances"][k]),
                axis=1,
            )
            log_post[:, k] = log_like + p["log_priors"][k]
        probs = _softmax(log_post)
    else:
        raise InvalidConfigError(f"unknown classifier kind: {model.kind!r}")
    return ScoreMatrix(values=probs, class_names=model.class_names)


def accuracy(model: TrainedModel, features, labels) -> float:
    """Fraction of rows whose argmax probability matches the label."""
    scores = predict_proba(model, features)
    predicted = np.argmax(scores.values, axis=1)
    return float(np.mean(predicted == np.asarray(labels)))


def save_model(model: TrainedModel, path):
    """Write the model as a versioned binary blob; round-trips bit-exactly.

    Layout: magic "FKMODEL1", a u32 little-endian JSON header length,
    the JSON header (kind, class names, validation accuracy, array
    specs), then each array's raw little-endian float64 bytes in header
    order.
    """
    arrays = sorted(model.parameters.items())
    header = {
        "format_version": 1,
        "kind": model.kind,
        "class_names": list(model.class_names),
        "validation_accuracy": model.validation_accuracy,
        "arrays": [
            {"name": name, "shape": list(arr.shape), "dtype": "<f8"}
            for name, arr in arrays
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> TrainedModel:
    """Read a model blob written by save_model."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise DataFormatError(f"{path}: not a model blob (bad magic {magic!r})")
        (header_len,) = struct.unpack("<I", fh.read(4))
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DataFormatError(f"{path}: corrupt model header: {exc}") from exc
        if header.get("format_version") != 1:
            raise DataFormatError(
                f"{path}: unsupported model format version {header.get('format_version')!r}"
            )
        parameters = {}
        for spec in header["arrays"]:
            count = int(np.prod(spec["shape"])) if spec["shape"] else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise DataFormatError(f"{path}: truncated array {spec['name']!r}")
            parameters[spec["name"]] = np.frombuffer(raw, dtype="<f8").reshape(spec["shape"]).copy()
    return TrainedModel(
        kind=header["kind"],
        parameters=parameters,
        class_names=tuple(header["class_names"]),
        validation_accuracy=float(header["validation_accuracy"]),
    )
