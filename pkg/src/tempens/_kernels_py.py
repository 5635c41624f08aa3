"""Pure-Python/numpy fallback for the compiled kernels.

Same signatures and semantics as tempens._kernels. Accumulation uses
math.fsum (exact rounding, strictly stronger than Neumaier compensation);
results may differ from the compiled path in the last ulp, never more.
"""

from __future__ import annotations

import math

import numpy as np


def comp_sum(x) -> float:
    return math.fsum(np.asarray(x, dtype=np.float64))


def comp_dot(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("length mismatch in comp_dot")
    return math.fsum(np.multiply(a, b))


def logsumexp(terms) -> float:
    terms = np.asarray(terms, dtype=np.float64)
    if terms.size == 0:
        raise ValueError("logsumexp of empty vector")
    m = float(terms.max())
    return m + math.log(math.fsum(np.exp(terms - m)))


def alias_build(probs):
    probs = np.asarray(probs, dtype=np.float64)
    k = probs.size
    if k == 0:
        raise ValueError("empty probability vector")
    accept = np.ones(k, dtype=np.float64)
    alias = np.arange(k, dtype=np.int64)
    scaled = probs * k
    # index stacks, identical processing order to the compiled kernel
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        accept[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large:
        accept[i] = 1.0
    for i in small:
        accept[i] = 1.0
    return accept, alias


def alias_counts(accept, alias, u, v):
    accept = np.asarray(accept, dtype=np.float64)
    alias = np.asarray(alias, dtype=np.int64)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("uniform vectors must have equal length")
    k = accept.size
    idx = np.minimum((u * k).astype(np.int64), k - 1)
    chosen = np.where(v < accept[idx], idx, alias[idx])
    return np.bincount(chosen, minlength=k).astype(np.int64)
