"""Seeded surrogate data: determinism, class balance, noise-tier views,
and the ARFF writer round-tripping through the ARFF parser."""

import numpy as np
import pytest

from fusekit.datasets import load_wisdm_arff, mean_impute
from fusekit.errors import InvalidConfigError
from fusekit.synthetic import (
    ARFF_SURROGATE,
    SYNTH_CLASS_NAMES,
    SYNTH_NOISE_TIERS,
    SYNTH_VIEW_ORDER,
    classifier_views,
    noisy_view,
    synthetic_base,
    write_synthetic_arff,
)


def test_base_is_deterministic():
    a = synthetic_base(n_samples=60, n_features=5, n_classes=3, seed=21)
    b = synthetic_base(n_samples=60, n_features=5, n_classes=3, seed=21)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    c = synthetic_base(n_samples=60, n_features=5, n_classes=3, seed=22)
    assert not np.array_equal(a.features, c.features)


def test_base_balances_classes_with_remainder_to_low_indices():
    data = synthetic_base(n_samples=10, n_features=4, n_classes=3, seed=1)
    counts = np.bincount(data.labels, minlength=3)
    assert counts.tolist() == [4, 3, 3]


def test_base_shapes_and_names():
    data = synthetic_base(n_samples=30, n_features=7, n_classes=4, seed=2)
    assert data.features.shape == (30, 7)
    assert data.labels.shape == (30,)
    assert data.class_names == SYNTH_CLASS_NAMES[:4]
    wide = synthetic_base(n_samples=20, n_features=3, n_classes=8, seed=2)
    assert wide.class_names == tuple(f"class_{j}" for j in range(8))


def test_base_classes_are_separable():
    # Same-class samples should sit closer to their class mean than to
    # the other classes' means for a clear majority of samples.
    data = synthetic_base(n_samples=300, n_features=10, n_classes=3, seed=3,
                          separation=3.0)
    means = np.stack([data.features[data.labels == k].mean(0) for k in range(3)])
    dists = np.linalg.norm(data.features[:, None, :] - means[None], axis=2)
    nearest = dists.argmin(axis=1)
    assert np.mean(nearest == data.labels) > 0.9


def test_base_validation():
    with pytest.raises(InvalidConfigError):
        synthetic_base(n_samples=10, n_classes=1)
    with pytest.raises(InvalidConfigError):
        synthetic_base(n_samples=2, n_classes=3)
    with pytest.raises(InvalidConfigError):
        synthetic_base(n_samples=10, n_classes=3, class_names=("a",))


def test_noisy_view_preserves_labels_and_adds_noise():
    data = synthetic_base(n_samples=50, n_features=6, n_classes=2, seed=4)
    view = noisy_view(data, 0.5, seed=99)
    np.testing.assert_array_equal(view.labels, data.labels)
    assert view.class_names == data.class_names
    assert not np.array_equal(view.features, data.features)
    silent = noisy_view(data, 0.0, seed=99)
    np.testing.assert_array_equal(silent.features, data.features)
    with pytest.raises(InvalidConfigError):
        noisy_view(data, -0.1, seed=1)


def test_classifier_views_order_and_shared_labels():
    data = synthetic_base(n_samples=40, n_features=5, n_classes=2, seed=5)
    views = classifier_views(data, seed=5)
    assert tuple(views.keys()) == SYNTH_VIEW_ORDER
    assert len(SYNTH_NOISE_TIERS) == len(SYNTH_VIEW_ORDER)
    for view in views.values():
        np.testing.assert_array_equal(view.labels, data.labels)
    # Higher noise tier -> larger deviation from the base features.
    deviations = [
        float(np.abs(views[kind].features - data.features).mean())
        for kind in SYNTH_VIEW_ORDER
    ]
    assert deviations[0] < deviations[1] < deviations[2]


def test_classifier_views_deterministic():
    data = synthetic_base(n_samples=40, n_features=5, n_classes=2, seed=6)
    a = classifier_views(data, seed=6)
    b = classifier_views(data, seed=6)
    for kind in SYNTH_VIEW_ORDER:
        np.testing.assert_array_equal(a[kind].features, b[kind].features)


def test_arff_writer_round_trips_through_parser(tmp_path):
    path = write_synthetic_arff(tmp_path / "surrogate.arff", seed=11)
    parsed = load_wisdm_arff(path)
    base = synthetic_base(
        n_features=ARFF_SURROGATE["n_features"],
        seed=11,
        separation=ARFF_SURROGATE["separation"],
        mixing=ARFF_SURROGATE["mixing"],
    )
    assert parsed.relation == "synthetic_activity_windows"
    assert parsed.features.shape == base.features.shape
    assert parsed.feature_names == tuple(f"x{j}" for j in range(43))
    assert parsed.class_names == base.class_names
    np.testing.assert_array_equal(parsed.labels, base.labels)
    # Non-missing cells survive the text round trip bit-exactly.
    mask = np.isnan(parsed.features)
    np.testing.assert_array_equal(
        parsed.features[~mask], base.features[~mask]
    )
    # Missing rate lands near the configured 1%.
    rate = mask.mean()
    assert 0.003 < rate < 0.03
    # Imputation then leaves a fully finite matrix.
    imputed, _ = mean_impute(parsed.features, fit_rows=range(parsed.features.shape[0]))
    assert np.all(np.isfinite(imputed))


def test_arff_writer_is_deterministic(tmp_path):
    p1 = write_synthetic_arff(tmp_path / "a.arff", seed=11)
    p2 = write_synthetic_arff(tmp_path / "b.arff", seed=11)
    assert p1.read_bytes() == p2.read_bytes()


def test_arff_writer_accepts_custom_data(tmp_path):
    data = synthetic_base(n_samples=12, n_features=3, n_classes=2, seed=8)
    path = write_synthetic_arff(tmp_path / "c.arff", data=data, missing_rate=0.0)
    parsed = load_wisdm_arff(path)
    np.testing.assert_array_equal(parsed.features, data.features)
    np.testing.assert_array_equal(parsed.labels, data.labels)
    with pytest.raises(InvalidConfigError):
        write_synthetic_arff(tmp_path / "d.arff", data=data, missing_rate=1.0)
