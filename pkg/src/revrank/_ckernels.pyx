# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batch revision arithmetic and the inner
accumulation loops of the resampling significance tests.

Each function has a numpy twin in :mod:`revrank.kernels`; the dispatcher
there picks this module when it imported successfully.  Randomness never
lives here: masks and resample indices are generated by the caller, so both
backends consume identical random streams.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow as cpow

cnp.import_array()


def alpha_values(double[::1] sims, double[::1] probs):
    """Elementwise revision exponent ((1-s)/(1+s)) ** (1-q)."""
    cdef Py_ssize_t n = sims.shape[0]
    if probs.shape[0] != n:
        raise ValueError("length mismatch")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double base, e
    for i in range(n):
        base = (1.0 - sims[i]) / (1.0 + sims[i])
        e = 1.0 - probs[i]
        o[i] = 1.0 if (base == 0.0 and e == 0.0) else cpow(base, e)
    return out


def positive_values(double[::1] priors, double[::1] alphas):
    """Elementwise prior ** alpha with 0**0 == 1."""
    cdef Py_ssize_t n = priors.shape[0]
    if alphas.shape[0] != n:
        raise ValueError("length mismatch")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = 1.0 if (priors[i] == 0.0 and alphas[i] == 0.0) else cpow(priors[i], alphas[i])
    return out


def negative_values(double[::1] priors, double[::1] alphas):
    """Elementwise 1 - (1 - prior) ** alpha; alpha == 1 returns prior exactly."""
    cdef Py_ssize_t n = priors.shape[0]
    if alphas.shape[0] != n:
        raise ValueError("length mismatch")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double q
    for i in range(n):
        if alphas[i] == 1.0:
            o[i] = priors[i]
            continue
        q = 1.0 - priors[i]
        o[i] = 0.0 if (q == 0.0 and alphas[i] == 0.0) else 1.0 - cpow(q, alphas[i])
    return out


def sim_only_values(double[::1] sims, double[::1] probs):
    """Elementwise sim ** q with 0**0 == 1."""
    cdef Py_ssize_t n = sims.shape[0]
    if probs.shape[0] != n:
        raise ValueError("length mismatch")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = 1.0 if (sims[i] == 0.0 and probs[i] == 0.0) else cpow(sims[i], probs[i])
    return out


def swap_pair_sums(double[:, ::1] a, double[:, ::1] b, unsigned char[:, ::1] masks):
    """Per-trial column sums after swapping rows of ``a``/``b`` where masked.

    ``a`` and ``b`` are (items, dims) sufficient-statistic matrices; ``masks``
    is (trials, items) with 1 meaning "swap this item".  Returns two
    (trials, dims) arrays: sums for the pseudo-A and pseudo-B systems.
    """
    cdef Py_ssize_t n = a.shape[0], d = a.shape[1]
    cdef Py_ssize_t trials = masks.shape[0]
    if b.shape[0] != n or b.shape[1] != d or masks.shape[1] != n:
        raise ValueError("shape mismatch")
    sa = np.zeros((trials, d), dtype=np.float64)
    sb = np.zeros((trials, d), dtype=np.float64)
    cdef double[:, ::1] va = sa, vb = sb
    cdef Py_ssize_t t, i, j
    for t in range(trials):
        for i in range(n):
            if masks[t, i]:
                for j in range(d):
                    va[t, j] += b[i, j]
                    vb[t, j] += a[i, j]
            else:
                for j in range(d):
                    va[t, j] += a[i, j]
                    vb[t, j] += b[i, j]
    return sa, sb


def gather_sums(double[:, ::1] stats, long long[:, ::1] idx):
    """Per-trial column sums of resampled rows: out[t] = sum_j stats[idx[t, j]]."""
    cdef Py_ssize_t n = stats.shape[0], d = stats.shape[1]
    cdef Py_ssize_t trials = idx.shape[0], m = idx.shape[1]
    out = np.zeros((trials, d), dtype=np.float64)
    cdef double[:, ::1] vo = out
    cdef Py_ssize_t t, j, k
    cdef long long r
    for t in range(trials):
        for j in range(m):
            r = idx[t, j]
            if r < 0 or r >= n:
                raise IndexError("resample index out of range")
            for k in range(d):
                vo[t, k] += stats[r, k]
    return out
