"""Classifier training, calibration, determinism, gradients, and the
model blob round trip."""

import numpy as np
import pytest

from fusekit.classifiers import (
    KINDS,
    LabeledDataset,
    TrainConfig,
    accuracy,
    load_model,
    mlp_loss_and_grad,
    predict_proba,
    save_model,
    softmax_loss_and_grad,
    train,
)
from fusekit.errors import (
    DataFormatError,
    InvalidConfigError,
    InvalidInputError,
    ShapeError,
)

GRAD_STEP = 1e-5
GRAD_RTOL = 1e-4


def blobs(seed=7, n_per_class=40, c=3, f=4, separation=6.0):
    """Gaussian blobs with unit noise and centers separation apart."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, size=(c, f))
    centers *= separation / max(1e-9, np.linalg.norm(centers, axis=1).mean())
    features, labels = [], []
    for k in range(c):
        features.append(centers[k] + rng.normal(0.0, 1.0, size=(n_per_class, f)))
        labels.append(np.full(n_per_class, k))
    return LabeledDataset(
        features=np.vstack(features),
        labels=np.concatenate(labels),
        class_names=tuple(f"class_{k}" for k in range(c)),
    )


def numeric_gradient(loss_fn, params, key, X, Y, l2):
    """Central finite differences of the loss over one parameter array."""
    grad = np.zeros_like(params[key])
    flat = grad.ravel()
    for idx in range(flat.size):
        bumped = {k: v.copy() for k, v in params.items()}
        bumped[key].ravel()[idx] += GRAD_STEP
        plus, _ = loss_fn(bumped, X, Y, l2)
        bumped[key].ravel()[idx] -= 2 * GRAD_STEP
        minus, _ = loss_fn(bumped, X, Y, l2)
        flat[idx] = (plus - minus) / (2 * GRAD_STEP)
    return grad


def one_hot(labels, c):
    out = np.zeros((labels.shape[0], c))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def relative_error(a, b):
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
    return float(np.max(np.abs(a - b) / scale))


# ---------------------------------------------------------- gradients


def test_softmax_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(5, 4))
    Y = one_hot(rng.integers(0, 3, size=5), 3)
    params = {"W": rng.normal(scale=0.3, size=(4, 3)), "b": rng.normal(scale=0.1, size=3)}
    _, analytic = softmax_loss_and_grad(params, X, Y, l2=1e-3)
    for key in params:
        numeric = numeric_gradient(softmax_loss_and_grad, params, key, X, Y, 1e-3)
        assert relative_error(analytic[key], numeric) < GRAD_RTOL


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(5, 4))
    Y = one_hot(rng.integers(0, 3, size=5), 3)
    params = {
        "W1": rng.normal(scale=0.4, size=(4, 6)),
        "b1": rng.normal(scale=0.2, size=6),
        "W2": rng.normal(scale=0.4, size=(6, 3)),
        "b2": rng.normal(scale=0.1, size=3),
    }
    _, analytic = mlp_loss_and_grad(params, X, Y, l2=1e-3)
    for key in params:
        numeric = numeric_gradient(mlp_loss_and_grad, params, key, X, Y, 1e-3)
        assert relative_error(analytic[key], numeric) < GRAD_RTOL


# ------------------------------------------------------------ training


def test_softmax_separable_blobs_reach_high_accuracy():
    data = blobs(seed=7)
    model = train("softmax", data, TrainConfig(seed=7, learning_rate=0.2, epochs=300))
    assert accuracy(model, data.features, data.labels) >= 0.95


@pytest.mark.parametrize("kind", KINDS)
def test_all_kinds_learn_separable_blobs(kind):
    data = blobs(seed=7)
    model = train(kind, data, TrainConfig(seed=7, learning_rate=0.2, epochs=300))
    assert accuracy(model, data.features, data.labels) >= 0.9


def test_single_class_training_rejected():
    data = LabeledDataset(
        features=np.zeros((4, 2)) + np.arange(4)[:, None],
        labels=np.zeros(4, dtype=int),
        class_names=("only", "other"),
    )
    with pytest.raises(InvalidInputError):
        train("softmax", data, TrainConfig())


def test_naive_bayes_needs_every_class_present():
    data = LabeledDataset(
        features=np.arange(12, dtype=float).reshape(6, 2),
        labels=np.array([0, 0, 0, 1, 1, 1]),
        class_names=("a", "b", "c"),
    )
    with pytest.raises(InvalidInputError):
        train("naive_bayes", data, TrainConfig())
    # Softmax tolerates an absent class (its column just stays weak).
    train("softmax", data, TrainConfig(epochs=5))


def test_unknown_kind_rejected():
    with pytest.raises(InvalidConfigError):
        train("svm", blobs(), TrainConfig())


@pytest.mark.parametrize("kind", KINDS)
def test_retraining_is_bit_identical(kind):
    data = blobs(seed=3)
    cfg = TrainConfig(seed=11, learning_rate=0.1, epochs=60)
    a = train(kind, data, cfg)
    b = train(kind, data, cfg)
    assert sorted(a.parameters) == sorted(b.parameters)
    for key in a.parameters:
        np.testing.assert_array_equal(a.parameters[key], b.parameters[key])
    np.testing.assert_array_equal(
        predict_proba(a, data.features).values,
        predict_proba(b, data.features).values,
    )


def test_validation_accuracy_recorded_from_holdout():
    data = blobs(seed=9)
    val = blobs(seed=10)
    model = train(
        "softmax",
        data,
        TrainConfig(seed=1, epochs=100, learning_rate=0.2),
        validation=(val.features, val.labels),
    )
    expected = accuracy(model, val.features, val.labels)
    assert model.validation_accuracy == expected


def test_train_config_validation():
    with pytest.raises(InvalidConfigError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(InvalidConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(InvalidConfigError):
        TrainConfig(seed=-1)


# ---------------------------------------------------------- prediction


@pytest.mark.parametrize("kind", KINDS)
def test_rows_are_calibrated_probabilities(kind):
    data = blobs(seed=2)
    model = train(kind, data, TrainConfig(seed=2, epochs=40))
    scores = predict_proba(model, data.features)
    values = scores.values
    assert np.all(values >= 0.0) and np.all(values <= 1.0)
    if kind in ("softmax", "mlp"):
        # Softmax outputs stay strictly inside (0, 1) on this toy data;
        # naive Bayes posteriors may round to exactly 1 when the other
        # classes' likelihoods underflow.
        assert np.all(values > 0.0) and np.all(values < 1.0)
    np.testing.assert_allclose(values.sum(axis=1), 1.0, atol=1e-6, rtol=0)
    assert scores.class_names == data.class_names


def test_point_deep_inside_blob_gets_its_class():
    data = blobs(seed=7)
    model = train("softmax", data, TrainConfig(seed=7, epochs=300, learning_rate=0.2))
    center = data.features[data.labels == 1].mean(axis=0, keepdims=True)
    scores = predict_proba(model, center)
    assert int(np.argmax(scores.values)) == 1


def test_zero_row_on_mirrored_data_is_near_uniform():
    rng = np.random.default_rng(21)
    half = rng.normal(size=(60, 3)) + 2.0
    features = np.vstack([half, -half])
    labels = np.array([0] * 60 + [1] * 60)
    data = LabeledDataset(features=features, labels=labels, class_names=("p", "n"))
    for kind in KINDS:
        model = train(kind, data, TrainConfig(seed=4, epochs=120, learning_rate=0.1))
        probs = predict_proba(model, np.zeros((1, 3))).values[0]
        assert probs == pytest.approx([0.5, 0.5], abs=0.05)


@pytest.mark.parametrize("kind", KINDS)
def test_feature_width_mismatch_rejected(kind):
    data = blobs(seed=1)
    model = train(kind, data, TrainConfig(epochs=5))
    with pytest.raises(ShapeError):
        predict_proba(model, np.zeros((2, data.n_features + 1)))


@pytest.mark.parametrize("kind", KINDS)
def test_label_permutation_equivariance(kind):
    data = blobs(seed=13)
    perm = np.array([2, 0, 1])  # new label for each old label
    relabeled = LabeledDataset(
        features=data.features,
        labels=perm[data.labels],
        class_names=tuple(np.array(data.class_names)[np.argsort(perm)]),
    )
    cfg = TrainConfig(seed=5, epochs=80, learning_rate=0.15)
    base = predict_proba(train(kind, data, cfg), data.features).values
    moved = predict_proba(train(kind, relabeled, cfg), data.features).values
    np.testing.assert_allclose(moved, base[:, np.argsort(perm)], atol=1e-9, rtol=0)


# ----------------------------------------------------------- round trip


@pytest.mark.parametrize("kind", KINDS)
def test_model_blob_round_trip_is_bit_exact(kind, tmp_path):
    data = blobs(seed=17)
    model = train(kind, data, TrainConfig(seed=17, epochs=30))
    path = tmp_path / f"{kind}.fkm"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.kind == model.kind
    assert loaded.class_names == model.class_names
    assert loaded.validation_accuracy == model.validation_accuracy
    assert sorted(loaded.parameters) == sorted(model.parameters)
    for key in model.parameters:
        np.testing.assert_array_equal(loaded.parameters[key], model.parameters[key])
    np.testing.assert_array_equal(
        predict_proba(loaded, data.features).values,
        predict_proba(model, data.features).values,
    )


def test_model_blob_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.fkm"
    path.write_bytes(b"NOTMODEL" + b"\x00" * 16)
    with pytest.raises(DataFormatError):
        load_model(path)


def test_model_blob_truncation_rejected(tmp_path):
    data = blobs(seed=19)
    model = train("softmax", data, TrainConfig(epochs=5))
    path = tmp_path / "model.fkm"
    save_model(model, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-16])
    with pytest.raises(DataFormatError):
        load_model(path)


# ------------------------------------------------------------- dataset


def test_labeled_dataset_validation():
    with pytest.raises(ShapeError):
        LabeledDataset(
            features=np.zeros((3, 2)), labels=np.zeros(2, dtype=int), class_names=("a",)
        )
    with pytest.raises(InvalidInputError):
        LabeledDataset(
            features=np.full((2, 2), np.nan),
            labels=np.zeros(2, dtype=int),
            class_names=("a", "b"),
        )
    with pytest.raises(InvalidInputError):
        LabeledDataset(
            features=np.zeros((2, 2)),
            labels=np.array([0, 5]),
            class_names=("a", "b"),
        )
