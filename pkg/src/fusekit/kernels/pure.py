"""Pure-Python/numpy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable.
Semantics match ``fusekit.kernels._core`` exactly: every reduction that
feeds fusion weights goes through ``math.fsum`` (exact summation), so
results are independent of element order and agree with the compiled
backend bit for bit on the same libm.
"""

import math

import numpy as np

VARIANT_TSALLIS = 0
VARIANT_SHANNON = 1

name = "pure"


def column_entropies(scores, alpha, tau, variant, normalize):
    """Per-column entropy of a d x c float64 matrix.

    Values must exceed tau (strictly) to enter the sum; in normalize
    mode the survivors are first divided by their exact sum. An empty
    column contributes 0.
    """
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    d, c = scores.shape
    out = np.zeros(c, dtype=np.float64)
    for j in range(c):
        col = scores[:, j]
        survivors = col[col > tau].tolist()
        if not survivors:
            continue
        if normalize:
            s = math.fsum(survivors)
            survivors = [p / s for p in survivors]
        if variant == VARIANT_TSALLIS:
            power_sum = math.fsum(p ** alpha for p in survivors)
            out[j] = (1.0 - power_sum) / (alpha - 1.0)
        else:
            out[j] = -math.fsum(p * math.log2(p) for p in survivors)
    return out


def entropy_total(scores, alpha, tau, variant, normalize):
    """Exact sum of the per-column entropies (one classifier's total)."""
    return math.fsum(column_entropies(scores, alpha, tau, variant, normalize).tolist())


def accumulate_weighted(out, scores, weight):
    """out += weight * scores, elementwise in place."""
    np.add(out, weight * scores, out=out)


def row_argmax(scores):
    """Per-row index of the maximum; ties go to the lowest index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.argmax(scores, axis=1).astype(np.int64)
