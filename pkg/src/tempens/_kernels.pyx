# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled reduction and sampling kernels.

Mirrors tempens._kernels_py; tempens._backend picks whichever is importable.
All sums are Neumaier-compensated so accumulation error stays O(eps)
independent of length.
"""

from libc.math cimport exp, fabs, log

import numpy as np


def comp_sum(const double[::1] x):
    """Compensated (Neumaier) sum of a float64 vector."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, c = 0.0, t, xi
    for i in range(n):
        xi = x[i]
        t = s + xi
        if fabs(s) >= fabs(xi):
            c += (s - t) + xi
        else:
            c += (xi - t) + s
        s = t
    return s + c


def comp_dot(const double[::1] a, const double[::1] b):
    """Compensated sum of elementwise products a[i]*b[i]."""
    cdef Py_ssize_t i, n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("length mismatch in comp_dot")
    cdef double s = 0.0, c = 0.0, t, p
    for i in range(n):
        p = a[i] * b[i]
        t = s + p
        if fabs(s) >= fabs(p):
            c += (s - t) + p
        else:
            c += (p - t) + s
        s = t
    return s + c


def logsumexp(const double[::1] terms):
    """Max-shifted log(sum(exp(terms))); no overflow for |terms| up to ~1e308."""
    cdef Py_ssize_t i, n = terms.shape[0]
    if n == 0:
        raise ValueError("logsumexp of empty vector")
    cdef double m = terms[0]
    for i in range(1, n):
        if terms[i] > m:
            m = terms[i]
    cdef double s = 0.0, c = 0.0, t, e
    for i in range(n):
        e = exp(terms[i] - m)
        t = s + e
        if fabs(s) >= fabs(e):
            c += (s - t) + e
        else:
            c += (e - t) + s
        s = t
    return m + log(s + c)


def alias_build(const double[::1] probs):
    """Walker/Vose alias tables for a probability vector.

    Returns (accept, alias): accept[j] is the acceptance threshold for
    column j, alias[j] the fallback bin. Reconstruction identity:
    probs[j] == (accept[j] + sum of (1 - accept[k]) over k with alias[k]==j) / K
    up to rounding.
    """
    cdef Py_ssize_t k = probs.shape[0]
    if k == 0:
        raise ValueError("empty probability vector")
    accept_arr = np.ones(k, dtype=np.float64)
    alias_arr = np.arange(k, dtype=np.int64)
    scaled_arr = np.empty(k, dtype=np.float64)
    small_arr = np.empty(k, dtype=np.int64)
    large_arr = np.empty(k, dtype=np.int64)
    cdef double[::1] accept = accept_arr
    cdef long long[::1] alias = alias_arr
    cdef double[::1] scaled = scaled_arr
    cdef long long[::1] small = small_arr
    cdef long long[::1] large = large_arr
    cdef Py_ssize_t i, ns = 0, nl = 0, s, l
    for i in range(k):
        scaled[i] = probs[i] * k
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        nl -= 1
        s = <Py_ssize_t> small[ns]
        l = <Py_ssize_t> large[nl]
        accept[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[ns] = l
            ns += 1
        else:
            large[nl] = l
            nl += 1
    # leftovers are 1 up to rounding: accept as-is
    while nl > 0:
        nl -= 1
        accept[<Py_ssize_t> large[nl]] = 1.0
    while ns > 0:
        ns -= 1
        accept[<Py_ssize_t> small[ns]] = 1.0
    return accept_arr, alias_arr


def alias_counts(const double[::1] accept, const long long[::1] alias,
                 const double[::1] u, const double[::1] v):
    """Histogram of alias-method draws given pre-generated uniforms u, v."""
    cdef Py_ssize_t k = accept.shape[0]
    cdef Py_ssize_t n = u.shape[0]
    if v.shape[0] != n:
        raise ValueError("uniform vectors must have equal length")
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            j = <Py_ssize_t> (u[i] * k)
            if j >= k:
                j = k - 1
            if v[i] < accept[j]:
                counts[j] += 1
            else:
                counts[<Py_ssize_t> alias[j]] += 1
    return counts_arr
