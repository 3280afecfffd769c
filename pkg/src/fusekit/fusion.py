"""Entropy-derived classifier weighting and score-level fusion.

A classifier's test-time output is a d x c matrix of per-sample class
probabilities. Summing a generalized (Tsallis) or Shannon entropy over
the matrix columns gives a scalar self-information total per classifier;
dividing each total by the grand total yields relative weights, and the
weighted sum of the score matrices is the fused decision.

Everything here is a pure function of its inputs. Score matrices are
copied and frozen at construction, so values are safe to share across
threads. Reductions that feed weights use exact summation, making the
results independent of sample order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from fusekit.errors import (
    DegenerateWeightsError,
    InvalidConfigError,
    InvalidInputError,
    ShapeError,
)
from fusekit.kernels import VARIANT_SHANNON, VARIANT_TSALLIS, get_kernels

VARIANTS = ("tsallis", "shannon")
COLUMN_MODES = ("normalized", "literal")

ROW_SUM_TOL = 1e-6
WEIGHT_SUM_TOL = 1e-9


class NegativeEntropyWarning(UserWarning):
    """Literal column mode produced a negative entropy total.

    Raw probability columns are not distributions; with alpha > 1 and
    many confident rows the power sum exceeds 1 and the entropy goes
    negative, so weights may leave [0, 1]. Literal mode reports the
    formula's behavior as-is instead of masking it.
    """


@dataclass(frozen=True)
class EntropyConfig:
    """Entropy settings: entropic index, filter threshold, variant, mode."""

    alpha: float = 2.0
    tau: float = 0.1
    variant: str = "tsallis"
    column_mode: str = "normalized"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfigError(f"unknown entropy variant: {self.variant!r}")
        if self.column_mode not in COLUMN_MODES:
            raise InvalidConfigError(f"unknown column mode: {self.column_mode!r}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.tau)):
            raise InvalidConfigError("alpha and tau must be finite")
        if self.variant == "tsallis" and self.alpha == 1.0:
            raise InvalidConfigError(
                "tsallis entropy is undefined at alpha = 1 (division by alpha - 1)"
            )
        if not 0.0 <= self.tau < 1.0:
            raise InvalidConfigError(f"tau must lie in [0, 1), got {self.tau}")

    @property
    def normalized(self) -> bool:
        return self.column_mode == "normalized"

    @property
    def variant_code(self) -> int:
        return VARIANT_TSALLIS if self.variant == "tsallis" else VARIANT_SHANNON


@dataclass(frozen=True)
class ScoreMatrix:
    """d x c matrix of per-sample class probabilities from one classifier.

    Rows must lie on the probability simplex within 1e-6; entries must
    be finite and in [0, 1]. The array is copied and made read-only.
    """

    values: np.ndarray
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C")
        if values.ndim != 2:
            raise ShapeError(f"score matrix must be 2-D, got {values.ndim}-D")
        d, c = values.shape
        if d < 1 or c < 2:
            raise ShapeError(f"score matrix needs d >= 1 and c >= 2, got {d} x {c}")
        if not self.class_names:
            names = tuple(f"class_{j}" for j in range(c))
        else:
            names = tuple(str(n) for n in self.class_names)
        if len(names) != c:
            raise ShapeError(
                f"{len(names)} class names for {c} score columns"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("score matrix contains non-finite values")
        if values.min() < 0.0 or values.max() > 1.0:
            raise InvalidInputError("score matrix entries must lie in [0, 1]")
        row_sums = values.sum(axis=1)
        worst = np.abs(row_sums - 1.0).max()
        if worst > ROW_SUM_TOL:
            bad = int(np.abs(row_sums - 1.0).argmax())
            raise InvalidInputError(
                f"row {bad} sums to {row_sums[bad]!r}, outside 1 +/- {ROW_SUM_TOL}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "class_names", names)

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def c(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class FusionWeights:
    """Per-classifier relative weights plus the entropy totals behind them."""

    weights: np.ndarray
    entropies: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        e = np.array(self.entropies, dtype=np.float64)
        if w.ndim != 1 or e.shape != w.shape:
            raise ShapeError("weights and entropies must be equal-length vectors")
        if abs(math.fsum(w.tolist()) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInputError(
                f"weights sum to {math.fsum(w.tolist())!r}, not 1 within {WEIGHT_SUM_TOL}"
            )
        w.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "entropies", e)


@dataclass(frozen=True)
class FusedDecision:
    """Fused score matrix plus its per-row argmax labels."""

    fused_scores: np.ndarray
    predicted_labels: np.ndarray = field(default=None)

    def __post_init__(self):
        scores = np.array(self.fused_scores, dtype=np.float64, order="C")
        labels = argmax_labels(scores)
        scores.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "fused_scores", scores)
        object.__setattr__(self, "predicted_labels", labels)


def _filtered(column, config: EntropyConfig) -> list[float]:
    values = [float(v) for v in np.asarray(column, dtype=np.float64).ravel()]
    if not all(math.isfinite(v) for v in values):
        raise InvalidInputError("entropy input contains non-finite values")
    survivors = [v for v in values if v > config.tau]
    if survivors and config.normalized:
        total = math.fsum(survivors)
        survivors = [v / total for v in survivors]
    return survivors


def shannon_column_entropy(column, config: EntropyConfig) -> float:
    """Base-2 Shannon entropy of the column values above the threshold.

    Values must strictly exceed config.tau to enter the sum; in
    normalized mode the survivors are first divided by their sum.
    Returns 0 when nothing survives the filter.
    """
    survivors = _filtered(column, config)
    if not survivors:
        return 0.0
    return -math.fsum(p * math.log2(p) for p in survivors)


def tsallis_column_entropy(column, config: EntropyConfig) -> float:
    """Tsallis entropy (1 - sum p^alpha) / (alpha - 1) of filtered values.

    Same threshold and normalization behavior as the Shannon variant.
    alpha = 1 is rejected: the expression divides by alpha - 1.
    """
    if config.alpha == 1.0:
        raise InvalidConfigError("tsallis entropy requires alpha != 1")
    survivors = _filtered(column, config)
    if not survivors:
        return 0.0
    power_sum = math.fsum(p ** config.alpha for p in survivors)
    return (1.0 - power_sum) / (config.alpha - 1.0)


def classifier_entropy(scores: ScoreMatrix, config: EntropyConfig, backend=None) -> float:
    """Total entropy of one classifier: sum of its column entropies."""
    kern = get_kernels(backend)
    return float(
        kern.entropy_total(
            scores.values, config.alpha, config.tau, config.variant_code, config.normalized
        )
    )


def _check_compatible(all_scores) -> tuple[int, int]:
    if not all_scores:
        raise ShapeError("need at least one score matrix")
    first = all_scores[0]
    for k, s in enumerate(all_scores[1:], start=1):
        if s.values.shape != first.values.shape:
            raise ShapeError(
                f"score matrix {k} is {s.values.shape[0]} x {s.values.shape[1]}, "
                f"expected {first.d} x {first.c}"
            )
        if s.class_names != first.class_names:
            raise ShapeError(f"score matrix {k} has a different class order")
    return first.d, first.c


def entropy_weights(
    all_scores,
    config: EntropyConfig,
    fallback_uniform: bool = False,
    backend=None,
) -> FusionWeights:
    """Relative weight per classifier: its entropy total over the grand total.

    Raises DegenerateWeightsError when the grand total is zero unless
    fallback_uniform is set, in which case uniform weights are returned.
    In literal column mode negative totals are reported via
    NegativeEntropyWarning and the weights may leave [0, 1].
    """
    if len(all_scores) < 2:
        raise ShapeError("entropy weighting needs at least 2 classifiers")
    _check_compatible(all_scores)
    entropies = [classifier_entropy(s, config, backend=backend) for s in all_scores]
    if config.column_mode == "literal" and any(e < 0.0 for e in entropies):
        warnings.warn(
            "literal column mode produced negative entropy totals; "
            "weights may fall outside [0, 1]",
            NegativeEntropyWarning,
            stacklevel=2,
        )
    total = math.fsum(entropies)
    if total == 0.0:
        if not fallback_uniform:
            raise DegenerateWeightsError(
                "total entropy over all classifiers is zero; "
                "pass fallback_uniform to use uniform weights"
            )
        weights = np.full(len(all_scores), 1.0 / len(all_scores))
    else:
        weights = np.array([e / total for e in entropies])
    return FusionWeights(weights=weights, entropies=np.array(entropies))


def _accumulate(all_scores, weights, backend=None) -> FusedDecision:
    kern = get_kernels(backend)
    d, c = _check_compatible(all_scores)
    fused = np.zeros((d, c), dtype=np.float64)
    for w, s in zip(weights, all_scores):
        kern.accumulate_weighted(fused, s.values, float(w))
    return FusedDecision(fused_scores=fused)


def sum_fusion(all_scores, backend=None) -> FusedDecision:
    """Plain sum rule: elementwise sum of the score matrices."""
    return _accumulate(all_scores, [1.0] * len(all_scores), backend=backend)


def weighted_sum_fusion(all_scores, weights, backend=None) -> FusedDecision:
    """Fixed-weight sum rule: sum of w_i * S_i with caller-chosen weights."""
    weights = [float(w) for w in weights]
    if len(weights) != len(all_scores):
        raise ShapeError(
            f"{len(weights)} weights for {len(all_scores)} score matrices"
        )
    if not all(math.isfinite(w) for w in weights):
        raise InvalidInputError("fusion weights must be finite")
    return _accumulate(all_scores, weights, backend=backend)


def entropy_weighted_fusion(
    all_scores,
    config: EntropyConfig,
    fallback_uniform: bool = False,
    backend=None,
) -> tuple[FusedDecision, FusionWeights]:
    """Entropy-weighted fusion: derive relative weights, then fuse.

    Returns the fused decision together with the weights so reports can
    display them.
    """
    fw = entropy_weights(
        all_scores, config, fallback_uniform=fallback_uniform, backend=backend
    )
    decision = _accumulate(all_scores, fw.weights.tolist(), backend=backend)
    return decision, fw


def argmax_labels(scores, backend=None) -> np.ndarray:
    """Per-row argmax as int64 labels; ties break to the lowest index."""
    if isinstance(scores, ScoreMatrix):
        scores = scores.values
    arr = np.ascontiguousarray(scores, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError("argmax needs a non-empty 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("argmax input contains non-finite values")
    return get_kernels(backend).row_argmax(arr)
