"""Brute-force reference implementations used to pin the library.

Everything here is written against the stated formulas with plain
Python lists, the math/cmath modules, and exact summation. No numpy,
no imports from fusekit: when a test compares the library against these
functions it is comparing two independently coded versions of the same
arithmetic.

Matrices are lists of rows; a "column" is collected by indexing every
row at the same position.
"""

import cmath
import math

TSALLIS = "tsallis"
SHANNON = "shannon"


def survivors(values, tau):
    """Values strictly greater than tau, in input order."""
    return [v for v in values if v > tau]


def column_entropy(values, alpha, tau, variant, normalize):
    """Entropy of one column after the threshold filter.

    normalize divides the surviving values by their sum first. An empty
    survivor set has entropy 0 by definition.
    """
    kept = survivors(values, tau)
    if not kept:
        return 0.0
    if normalize:
        total = math.fsum(kept)
        kept = [v / total for v in kept]
    if variant == TSALLIS:
        power_sum = math.fsum(v ** alpha for v in kept)
        return (1.0 - power_sum) / (alpha - 1.0)
    if variant == SHANNON:
        return -math.fsum(v * math.log2(v) for v in kept)
    raise ValueError(variant)


def matrix_entropy(rows, alpha, tau, variant, normalize):
    """Total entropy of one classifier: sum over class columns."""
    c = len(rows[0])
    per_column = [
        column_entropy([row[j] for row in rows], alpha, tau, variant, normalize)
        for j in range(c)
    ]
    return math.fsum(per_column)


def relative_weights(matrices, alpha, tau, variant, normalize):
    """(weights, entropies) per classifier: each total over the grand total."""
    entropies = [
        matrix_entropy(rows, alpha, tau, variant, normalize) for rows in matrices
    ]
    grand = math.fsum(entropies)
    if grand == 0.0:
        raise ZeroDivisionError("zero total entropy")
    return [e / grand for e in entropies], entropies


def fuse(matrices, weights):
    """Entrywise weighted sum of equally shaped matrices."""
    d, c = len(matrices[0]), len(matrices[0][0])
    return [
        [
            math.fsum(w * rows[i][j] for w, rows in zip(weights, matrices))
            for j in range(c)
        ]
        for i in range(d)
    ]


def full_pipeline(matrices, alpha, tau, variant, normalize):
    """Entropy weights, then the weighted sum: the complete fusion rule."""
    weights, entropies = relative_weights(matrices, alpha, tau, variant, normalize)
    return fuse(matrices, weights), weights, entropies


def argmax_rows(rows):
    """Per-row index of the maximum; first occurrence wins ties."""
    labels = []
    for row in rows:
        best, best_value = 0, row[0]
        for j, v in enumerate(row):
            if v > best_value:
                best, best_value = j, v
        labels.append(best)
    return labels


def dft2_magnitude(rows):
    """|X[u][v]| of the unnormalized 2-D DFT, by the double sum."""
    r, q = len(rows), len(rows[0])
    out = []
    for u in range(r):
        out_row = []
        for v in range(q):
            acc = 0j
            for i in range(r):
                for j in range(q):
                    angle = -2.0 * math.pi * (u * i / r + v * j / q)
                    acc += rows[i][j] * cmath.exp(1j * angle)
            out_row.append(abs(acc))
        out.append(out_row)
    return out


def confusion_counts(true_labels, predicted_labels, c):
    """c x c count grid as nested lists, rows true, columns predicted."""
    grid = [[0] * c for _ in range(c)]
    for t, p in zip(true_labels, predicted_labels):
        grid[t][p] += 1
    return grid


def accuracy_percent(grid):
    total = sum(sum(row) for row in grid)
    correct = sum(grid[k][k] for k in range(len(grid)))
    return 100.0 * correct / total


def recall_percent(grid):
    out = []
    for k, row in enumerate(grid):
        support = sum(row)
        out.append(100.0 * row[k] / support if support else 0.0)
    return out


def macro_f1_percent(grid):
    c = len(grid)
    f1s = []
    for k in range(c):
        row_total = sum(grid[k])
        col_total = sum(grid[i][k] for i in range(c))
        precision = grid[k][k] / col_total if col_total else 0.0
        recall = grid[k][k] / row_total if row_total else 0.0
        f1s.append(
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
    return 100.0 * math.fsum(f1s) / c


def simplex_row(rand, c):
    """One random probability row: positive draws scaled to unit sum."""
    raw = [-math.log(1.0 - rand.random()) + 1e-9 for _ in range(c)]
    total = math.fsum(raw)
    return [v / total for v in raw]


def random_matrices(rand, j, d, c):
    """j row-stochastic d x c matrices as nested lists."""
    return [[simplex_row(rand, c) for _ in range(d)] for _ in range(j)]
