"""Seeded synthetic surrogate data for the desk-scale experiments.

When the real archives are not on disk, the experiment commands fall
back to Gaussian class clusters observed through three noise tiers, one
per built-in classifier. The noisiest view goes to the naive Bayes
model, whose overconfident-but-wrong scores carry little entropy after
the threshold filter, so entropy weighting pushes it down while plain
summation keeps absorbing its confident mistakes. That reproduces the
published ordering (entropy-weighted fusion above plain score fusion)
with mechanics, not hand-picked numbers.
"""

from __future__ import annotations

import numpy as np

from fusekit.classifiers import LabeledDataset
from fusekit.errors import InvalidConfigError

SYNTH_CLASS_NAMES = (
    "walking",
    "jogging",
    "upstairs",
    "downstairs",
    "sitting",
    "standing",
)

# Per-classifier observation noise, ordered like SYNTH_VIEW_ORDER.
SYNTH_NOISE_TIERS = (1.0, 1.3, 1.7)
SYNTH_VIEW_ORDER = ("softmax", "mlp", "naive_bayes")

SYNTH_SAMPLES = 1500
SYNTH_FEATURES = 24
SYNTH_SEPARATION = 1.0
SYNTH_MIXING = 0.8

# ARFF-path surrogate: one shared feature matrix, WISDM-like width.
# Easier than the multi-view surrogate because all three classifiers
# share one view, so ensemble error diversity is lower.
ARFF_SURROGATE = {
    "n_features": 43,
    "separation": 0.8,
    "mixing": 0.8,
    "missing_rate": 0.01,
}


def synthetic_base(
    n_samples: int = SYNTH_SAMPLES,
    n_features: int = SYNTH_FEATURES,
    n_classes: int = len(SYNTH_CLASS_NAMES),
    seed: int = 7,
    separation: float = SYNTH_SEPARATION,
    mixing: float = SYNTH_MIXING,
    class_names=None,
) -> LabeledDataset:
    """Gaussian class clusters pushed through a random mixing matrix.

    The mixing correlates the feature columns the way real sensor
    channels are correlated; a diagonal-covariance model double-counts
    that shared evidence and turns overconfident, which is the failure
    mode the entropy weighting is supposed to absorb.
    """
    if n_classes < 2:
        raise InvalidConfigError("need at least 2 classes")
    if n_samples < n_classes:
        raise InvalidConfigError("need at least one sample per class")
    if class_names is None:
        if n_classes <= len(SYNTH_CLASS_NAMES):
            class_names = SYNTH_CLASS_NAMES[:n_classes]
        else:
            class_names = tuple(f"class_{j}" for j in range(n_classes))
    elif len(class_names) != n_classes:
        raise InvalidConfigError("class_names length must match n_classes")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, separation, size=(n_classes, n_features))
    mix = np.eye(n_features) + mixing * rng.normal(
        0.0, 1.0 / np.sqrt(n_features), size=(n_features, n_features)
    )
    # Balanced counts; the remainder goes to the lowest class indices.
    base, extra = divmod(n_samples, n_classes)
    counts = [base + (1 if k < extra else 0) for k in range(n_classes)]
    labels = np.repeat(np.arange(n_classes, dtype=np.int64), counts)
    latent = centers[labels] + rng.normal(0.0, 1.0, size=(n_samples, n_features))
    features = latent @ mix
    order = rng.permutation(n_samples)
    return LabeledDataset(
        features=features[order], labels=labels[order], class_names=class_names
    )


def noisy_view(data: LabeledDataset, noise: float, seed: int) -> LabeledDataset:
    """The same samples observed through extra sensor noise."""
    if noise < 0:
        raise InvalidConfigError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    features = data.features + rng.normal(0.0, noise, size=data.features.shape)
    return LabeledDataset(
        features=features, labels=data.labels, class_names=data.class_names
    )


def classifier_views(data: LabeledDataset, seed: int = 7):
    """One noise-tiered view per built-in classifier kind.

    Returns {kind: LabeledDataset} in SYNTH_VIEW_ORDER, sharing labels
    and sample order with the base data so one split serves all views.
    """
    views = {}
    for i, kind in enumerate(SYNTH_VIEW_ORDER):
        views[kind] = noisy_view(data, SYNTH_NOISE_TIERS[i], seed + 1000 * (i + 1))
    return views


def write_synthetic_arff(
    path,
    data: LabeledDataset = None,
    missing_rate: float = ARFF_SURROGATE["missing_rate"],
    seed: int = 11,
    relation: str = "synthetic_activity_windows",
):
    """Write surrogate data as a real ARFF file and return its path.

    The file carries UNIQUE_ID and user identifier attributes (excluded
    on load), numeric feature attributes, a nominal class attribute,
    and a sprinkle of '?' cells so the missing-value path is exercised.
    When no data is given, the ARFF_SURROGATE parameters produce a
    WISDM-shaped dataset.
    """
    if not 0.0 <= missing_rate < 1.0:
        raise InvalidConfigError("missing_rate must lie in [0, 1)")
    if data is None:
        data = synthetic_base(
            n_features=ARFF_SURROGATE["n_features"],
            seed=seed,
            separation=ARFF_SURROGATE["separation"],
            mixing=ARFF_SURROGATE["mixing"],
        )
    rng = np.random.default_rng(seed + 500)
    missing = rng.random(data.features.shape) < missing_rate
    lines = [f"@relation {relation}", ""]
    lines.append('@attribute "UNIQUE_ID" numeric')
    lines.append("@attribute user numeric")
    for j in range(data.n_features):
        lines.append(f"@attribute x{j} numeric")
    lines.append("@attribute class {" + ",".join(data.class_names) + "}")
    lines.append("")
    lines.append("@data")
    for i in range(data.n):
        cells = [str(i + 1), str(1 + i % 7)]
        for j in range(data.n_features):
            cells.append("?" if missing[i, j] else repr(float(data.features[i, j])))
        cells.append(data.class_names[data.labels[i]])
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
