# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels.

Column entropies use exact (Shewchuk partials) summation, the same
algorithm as math.fsum, so totals are independent of element order and
bit-identical to the pure backend.
"""

from libc.math cimport fabs, pow, log2

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef enum:
    _TSALLIS = 0
    _SHANNON = 1

VARIANT_TSALLIS = _TSALLIS
VARIANT_SHANNON = _SHANNON

name = "compiled"

DEF MAX_PARTIALS = 128


cdef struct ExactSum:
    double p[MAX_PARTIALS]
    int n


cdef inline void esum_init(ExactSum* acc) noexcept nogil:
    acc.n = 0


cdef inline int esum_add(ExactSum* acc, double x) noexcept nogil:
    # Shewchuk partials update; returns 0 if the buffer would overflow
    # (cannot happen for the magnitude range entropy terms live in).
    cdef int i = 0, j
    cdef double y, hi, yr, lo
    for j in range(acc.n):
        y = acc.p[j]
        if fabs(x) < fabs(y):
            hi = x
            x = y
            y = hi
        hi = x + y
        yr = hi - x
        lo = y - yr
        if lo != 0.0:
            acc.p[i] = lo
            i += 1
        x = hi
    acc.n = i
    if x != 0.0:
        if acc.n >= MAX_PARTIALS:
            return 0
        acc.p[acc.n] = x
        acc.n += 1
    return 1


cdef inline double esum_total(ExactSum* acc) noexcept nogil:
    # Correctly rounded total, including the round-half-even fixup.
    cdef int n = acc.n
    cdef double hi = 0.0, x, y, yr, lo = 0.0
    if n > 0:
        n -= 1
        hi = acc.p[n]
        while n > 0:
            x = hi
            n -= 1
            y = acc.p[n]
            hi = x + y
            yr = hi - x
            lo = y - yr
            if lo != 0.0:
                break
        if n > 0 and ((lo < 0.0 and acc.p[n - 1] < 0.0) or
                      (lo > 0.0 and acc.p[n - 1] > 0.0)):
            y = lo * 2.0
            x = hi + y
            yr = x - hi
            if y == yr:
                hi = x
    return hi


def column_entropies(scores, double alpha, double tau, int variant, bint normalize):
    """Per-column entropy of a d x c float64 matrix (strict p > tau filter)."""
    cdef const double[:, ::1] M = np.ascontiguousarray(scores, dtype=np.float64)
    cdef Py_ssize_t d = M.shape[0]
    cdef Py_ssize_t c = M.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(c, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double p, s, q
    cdef ExactSum acc
    cdef int ok = 1
    cdef int empty

    with nogil:
        for j in range(c):
            s = 1.0
            empty = 1
            if normalize:
                esum_init(&acc)
                for i in range(d):
                    p = M[i, j]
                    if p > tau:
                        empty = 0
                        ok &= esum_add(&acc, p)
                s = esum_total(&acc)
            else:
                for i in range(d):
                    if M[i, j] > tau:
                        empty = 0
                        break
            if empty:
                out[j] = 0.0
                continue
            esum_init(&acc)
            if variant == _TSALLIS:
                for i in range(d):
                    p = M[i, j]
                    if p > tau:
                        q = p / s if normalize else p
                        ok &= esum_add(&acc, pow(q, alpha))
                out[j] = (1.0 - esum_total(&acc)) / (alpha - 1.0)
            else:
                for i in range(d):
                    p = M[i, j]
                    if p > tau:
                        q = p / s if normalize else p
                        ok &= esum_add(&acc, q * log2(q))
                out[j] = -esum_total(&acc)
    if not ok:
        raise OverflowError("exact-sum partials buffer exceeded")
    return out_arr


def entropy_total(scores, double alpha, double tau, int variant, bint normalize):
    """Exact sum of the per-column entropies (one classifier's total)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cols = column_entropies(
        scores, alpha, tau, variant, normalize)
    cdef double[::1] v = cols
    cdef Py_ssize_t j
    cdef ExactSum acc
    esum_init(&acc)
    for j in range(v.shape[0]):
        if not esum_add(&acc, v[j]):
            raise OverflowError("exact-sum partials buffer exceeded")
    return esum_total(&acc)


def accumulate_weighted(out, scores, double weight):
    """out += weight * scores, elementwise in place."""
    cdef double[:, ::1] O = out
    cdef const double[:, ::1] S = np.ascontiguousarray(scores, dtype=np.float64)
    cdef Py_ssize_t d = O.shape[0]
    cdef Py_ssize_t c = O.shape[1]
    if S.shape[0] != d or S.shape[1] != c:
        raise ValueError("shape mismatch in accumulate_weighted")
    cdef Py_ssize_t i, j
    cdef double t
    with nogil:
        for i in range(d):
            for j in range(c):
                t = weight * S[i, j]
                O[i, j] = O[i, j] + t


def row_argmax(scores):
    """Per-row index of the maximum; ties go to the lowest index."""
    cdef const double[:, ::1] S = np.ascontiguousarray(scores, dtype=np.float64)
    cdef Py_ssize_t d = S.shape[0]
    cdef Py_ssize_t c = S.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_arr = np.empty(d, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i, j, best
    cdef double bv
    with nogil:
        for i in range(d):
            best = 0
            bv = S[i, 0]
            for j in range(1, c):
                if S[i, j] > bv:
                    bv = S[i, j]
                    best = j
            out[i] = best
    return out_arr
