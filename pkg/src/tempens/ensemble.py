"""Canonical weights over a discrete spectrum and their observables.

The central object is the normalized weight vector

    p_i = g_i * exp(-rate * x_i) / Z,   Z = sum_j g_j * exp(-rate * x_j),

computed in the log domain with a max shift so nothing overflows even when
|rate * x| reaches several hundred. For a time spectrum the same weights are
the decay-time distribution of an unstable system and `rate` is the decay
constant; for an energy spectrum `rate` plays the inverse-temperature role.
Unit conversions (temperature, persistence-per-length) live at the CLI
boundary; here `rate` is always the bare coefficient in the exponent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend as backend
from .spectra import KIND_TIME, Spectrum

NORMALIZATION_TOL = 1e-12
ENTROPY_IDENTITY_TOL = 1e-10


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not np.isfinite(rate):
        raise ValueError(f"rate must be finite, got {rate!r}")
    if rate < 0:
        raise ValueError(f"negative rate {rate!r} is outside the supported regime")
    return rate


@dataclass(frozen=True)
class GibbsWeights:
    """Normalized canonical weights attached to their spectrum and rate.

    probs[i] is the total weight of level i (degeneracy included). The
    constructor checks shape, non-negativity and normalization to 1e-12.
    Strict positivity holds in exact arithmetic; float64 entries underflow
    to 0 once rate*(x_i - x_min) exceeds ~745, which is accepted.
    """

    spectrum: Spectrum
    rate: float
    log_partition: float
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != self.spectrum.values.shape:
            raise ValueError("probs must have one entry per spectrum level")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probs must be finite and non-negative")
        err = abs(backend.comp_sum(probs) - 1.0)
        if err > NORMALIZATION_TOL:
            raise ValueError(f"probs must sum to 1 within {NORMALIZATION_TOL}, off by {err:.3e}")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "rate", _check_rate(self.rate))


def log_partition_function(spectrum: Spectrum, rate: float) -> float:
    """log Z = log sum_i g_i exp(-rate * x_i), max-shifted, compensated."""
    rate = _check_rate(rate)
    terms = np.log(spectrum.degeneracies.astype(np.float64)) - rate * spectrum.values
    out = backend.logsumexp(terms)
    if not np.isfinite(out):
        raise FloatingPointError(f"log partition function is not finite: {out!r}")
    return float(out)


def boltzmann_weights(spectrum: Spectrum, rate: float) -> GibbsWeights:
    """Normalized canonical weights at the given rate."""
    rate = _check_rate(rate)
    terms = np.log(spectrum.degeneracies.astype(np.float64)) - rate * spectrum.values
    log_z = backend.logsumexp(terms)
    if not np.isfinite(log_z):
        raise FloatingPointError(f"log partition function is not finite: {log_z!r}")
    # exponents are <= 0 because log_z >= max(terms): no overflow possible
    probs = np.exp(terms - log_z)
    return GibbsWeights(spectrum=spectrum, rate=rate, log_partition=float(log_z), probs=probs)


def mean(weights: GibbsWeights) -> float:
    """Ensemble mean of the spectrum values; lies strictly inside (min, max)."""
    return float(backend.comp_dot(weights.probs, weights.spectrum.values))


def variance(weights: GibbsWeights) -> float:
    """Ensemble variance; 0 only when a single level carries all weight."""
    m = mean(weights)
    centered = weights.spectrum.values - m
    var = backend.comp_dot(weights.probs, centered * centered)
    return max(float(var), 0.0)


def _entropy_sum(probs: np.ndarray, degeneracies: np.ndarray) -> float:
    """sum_i p_i ln(p_i / g_i) with the p ln p -> 0 limit at p = 0."""
    mask = probs > 0
    p = probs[mask]
    logs = np.log(p) - np.log(degeneracies[mask].astype(np.float64))
    return float(backend.comp_dot(p, logs))


def entropy_trace(weights: GibbsWeights) -> float:
    """sum_i p_i ln(p_i / g_i); always <= 0.

    Satisfies the exponential-family identity
    entropy_trace == -(rate * mean + log_partition) to ~1e-10, which callers
    use as a self-check.
    """
    return _entropy_sum(weights.probs, weights.spectrum.degeneracies)


@dataclass(frozen=True)
class SurvivalCurve:
    """Expected-survivor counts at each level time.

    t0 is the reporting origin (0 for theoretical curves: times are measured
    absolutely; the first level time for empirical curves). counts must be
    non-increasing and start no higher than n0.
    """

    t0: float
    times: np.ndarray
    counts: np.ndarray
    n0: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.float64)
        if times.ndim != 1 or times.shape != counts.shape or times.size == 0:
            raise ValueError("times and counts must be matching non-empty 1-D arrays")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if np.any(np.diff(counts) > 0):
            raise ValueError("survivor counts must be non-increasing")
        if counts[0] > self.n0:
            raise ValueError(f"count at the first time ({counts[0]}) exceeds n0 ({self.n0})")
        times = times.copy()
        counts = counts.copy()
        times.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "counts", counts)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.counts.tolist()))


def survival_curve(n0: float, weights: GibbsWeights) -> SurvivalCurve:
    """Expected survivors n0 * exp(-rate * t_i) at each time level.

    Times are measured from 0 (the stored t0), so the curve of a spectrum
    starting at t > 0 starts below n0. Requires a time-kind spectrum.
    """
    if weights.spectrum.kind != KIND_TIME:
        raise ValueError("survival curves are defined for time spectra only")
    if n0 <= 0:
        raise ValueError("n0 must be > 0")
    t = weights.spectrum.values
    counts = n0 * np.exp(-weights.rate * t)
    return SurvivalCurve(t0=0.0, times=t, counts=counts, n0=float(n0))


def persistence(rate: float, length: float) -> float:
    """Persistence per unit length, rate / length."""
    if not (np.isfinite(length) and length > 0):
        raise ValueError(f"length must be finite and > 0, got {length!r}")
    if not (np.isfinite(rate) and rate > 0):
        raise ValueError(f"rate must be finite and > 0, got {rate!r}")
    return rate / length
