"""Signal and feature preprocessing: normalization, windowing, the
1D-to-2D restructure with its 2D FFT, and window-statistics features
for raw triaxial accelerometer streams.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from fusekit.errors import (
    InvalidConfigError,
    InvalidInputError,
    ShapeError,
    UnsupportedSizeError,
)

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class MultiChannelWindow:
    """One sample window: k channels of w readings each (k x w matrix)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C")
        if values.ndim != 2 or values.shape[1] < 1:
            raise ShapeError("window must be a k x w matrix with w > 0")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("window contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Restructured2D:
    """Per-channel r x q matrices obtained by reshaping w-length vectors."""

    channels: np.ndarray  # k x r x q

    def __post_init__(self):
        arr = np.array(self.channels, dtype=np.float64, order="C")
        if arr.ndim != 3:
            raise ShapeError("restructured data must be k x r x q")
        arr.setflags(write=False)
        object.__setattr__(self, "channels", arr)


def zscore_fit_transform(train):
    """Column-wise z-scoring fit on the training matrix.

    Returns (transformed, means, stds). Population stddev; columns with
    stddev below the floor are floored to 1e-12 with a warning so a
    constant column maps to zeros rather than NaN.
    """
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] == 0:
        raise ShapeError("training matrix must be non-empty and 2-D")
    means = train.mean(axis=0)
    stds = train.std(axis=0)
    if np.any(stds < STD_FLOOR):
        warnings.warn(
            f"{int(np.sum(stds < STD_FLOOR))} feature column(s) have near-zero "
            "variance; stddev floored at 1e-12",
            stacklevel=2,
        )
        stds = np.maximum(stds, STD_FLOOR)
    return (train - means) / stds, means, stds


def zscore_apply(test, means, stds):
    """Apply previously fitted column statistics; never refits on test data."""
    test = np.asarray(test, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    stds = np.maximum(np.asarray(stds, dtype=np.float64), STD_FLOOR)
    if test.ndim != 2 or test.shape[1] != means.shape[0]:
        raise ShapeError(
            f"test matrix width {test.shape[-1] if test.ndim == 2 else '?'} does not "
            f"match {means.shape[0]} fitted columns"
        )
    return (test - means) / stds


def restructure_1d_to_2d(vector, rows: int, cols: int, order: str = "row"):
    """Reshape a w-vector into rows x cols, row-major by default.

    Flattening the result in the same order returns the input exactly;
    column-major is available for layout-sensitivity experiments.
    """
    vector = np.asarray(vector, dtype=np.float64).ravel()
    if rows * cols != vector.size:
        raise ShapeError(
            f"cannot reshape {vector.size} values into {rows} x {cols}"
        )
    if order not in ("row", "col"):
        raise InvalidConfigError(f"order must be 'row' or 'col', got {order!r}")
    return vector.reshape(rows, cols, order="C" if order == "row" else "F").copy()


def restructure_window(window, rows: int, cols: int, order: str = "row") -> Restructured2D:
    """Restructure every channel of a k x w window into r x q matrices."""
    values = window.values if isinstance(window, MultiChannelWindow) else np.asarray(window)
    stacked = np.stack(
        [restructure_1d_to_2d(values[k], rows, cols, order=order) for k in range(values.shape[0])]
    )
    return Restructured2D(channels=stacked)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _fft1d(x: np.ndarray) -> np.ndarray:
    # Radix-2 Cooley-Tukey over a power-of-two length.
    n = x.shape[0]
    if n == 1:
        return x
    even = _fft1d(x[::2])
    odd = _fft1d(x[1::2])
    twiddle = np.exp(-2j * np.pi * np.arange(n) / n)
    return np.concatenate(
        [even + twiddle[: n // 2] * odd, even + twiddle[n // 2 :] * odd]
    )


def fft2d_magnitude(matrix):
    """Magnitude of the unnormalized forward 2-D DFT of an r x q matrix.

    Both dimensions must be powers of two (radix-2 transform). Output is
    unshifted and carries no 1/(rq) factor.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ShapeError("2-D FFT input must be a matrix")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("2-D FFT input contains non-finite values")
    r, q = matrix.shape
    if not (_is_pow2(r) and _is_pow2(q)):
        raise UnsupportedSizeError(
            f"radix-2 transform needs power-of-two dimensions, got {r} x {q}"
        )
    stage = np.empty((r, q), dtype=np.complex128)
    for i in range(r):
        stage[i] = _fft1d(matrix[i].astype(np.complex128))
    for j in range(q):
        stage[:, j] = _fft1d(stage[:, j].copy())
    return np.abs(stage)


def fft_window(window, rows: int, cols: int, order: str = "row") -> Restructured2D:
    """Restructure a k x w window and take the 2-D FFT magnitude per channel."""
    restructured = restructure_window(window, rows, cols, order=order)
    mags = np.stack([fft2d_magnitude(ch) for ch in restructured.channels])
    return Restructured2D(channels=mags)


def _peak_interval(axis: np.ndarray) -> float:
    # Strict local maxima above the axis mean; 0 when fewer than 2 peaks.
    mean = axis.mean()
    inner = axis[1:-1]
    peaks = np.where((inner > axis[:-2]) & (inner > axis[2:]) & (inner > mean))[0] + 1
    if peaks.size < 2:
        return 0.0
    return float(np.diff(peaks).mean())


def extract_wisdm_features(window):
    """Summary features of a 200 x 3 accelerometer window.

    Per axis: mean, stddev, mean absolute deviation from the mean, and
    mean inter-peak interval in samples; plus the mean of the resultant
    magnitude sqrt(x^2 + y^2 + z^2). 13 features, axis-major order.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape != (200, 3):
        raise ShapeError(
            f"expected a 200 x 3 window, got {window.shape}"
        )
    features = []
    for axis_idx in range(3):
        axis = window[:, axis_idx]
        mean = axis.mean()
        features.append(mean)
        features.append(axis.std())
        features.append(np.abs(axis - mean).mean())
        features.append(_peak_interval(axis))
    features.append(np.sqrt((window ** 2).sum(axis=1)).mean())
    return np.array(features)


def sliding_windows(values, labels, window: int, overlap: float):
    """Cut a labeled stream into fixed-size windows with fractional overlap.

    Stride is window * (1 - overlap). Each window takes the majority
    label (lowest label index on a tie); windows whose majority does not
    exceed half the window are dropped.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    if values.ndim != 2 or values.shape[0] != labels.shape[0]:
        raise ShapeError("values and labels must have matching row counts")
    if window < 1 or window > values.shape[0]:
        raise ShapeError(f"window {window} does not fit a stream of {values.shape[0]}")
    if not 0.0 <= overlap < 1.0:
        raise InvalidConfigError(f"overlap must lie in [0, 1), got {overlap}")
    stride = max(1, int(round(window * (1.0 - overlap))))
    out = []
    for start in range(0, values.shape[0] - window + 1, stride):
        segment = labels[start : start + window]
        counts = np.bincount(segment)
        majority = int(counts.argmax())
        if counts[majority] * 2 <= window:
            continue
        out.append((values[start : start + window], majority))
    return out
