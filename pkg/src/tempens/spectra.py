"""Discrete, bounded-below spectra for the two ensemble flavors.

A spectrum is a sorted list of distinct levels with positive integer
degeneracies, tagged as either an energy spectrum or a time spectrum. The
equally spaced half-offset family t_n = d*(n + 1/2) (quantum of size d) is
the workhorse time spectrum; explicit level lists and a small text file
format cover everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

KIND_ENERGY = "energy"
KIND_TIME = "time"
_KINDS = (KIND_ENERGY, KIND_TIME)


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Sorted distinct levels with degeneracies.

    Parameters
    ----------
    kind : str
        "energy" or "time".
    values : ndarray of float64
        Strictly increasing, finite. values[0] is the spectrum minimum.
    degeneracies : ndarray of int64
        Positive multiplicity per level, same length as `values`.

    Instances are immutable; the arrays are marked read-only.
    """

    kind: str
    values: np.ndarray
    degeneracies: np.ndarray

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}; expected one of {_KINDS}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("spectrum needs a non-empty 1-D value array")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum values must be finite")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise ValueError("spectrum values must be strictly increasing (merge duplicates first)")
        degs = np.asarray(self.degeneracies)
        if degs.shape != values.shape:
            raise ValueError("degeneracies must match values in length")
        if not np.issubdtype(degs.dtype, np.integer):
            as_int = degs.astype(np.int64)
            if not np.array_equal(as_int, degs):
                raise ValueError("degeneracies must be integers")
            degs = as_int
        if np.any(degs < 1):
            raise ValueError("degeneracies must be >= 1")
        object.__setattr__(self, "values", _frozen_array(values, np.float64))
        object.__setattr__(self, "degeneracies", _frozen_array(degs, np.int64))

    @property
    def count(self) -> int:
        """Number of distinct levels."""
        return int(self.values.size)


def make_explicit_spectrum(kind: str, values, degeneracies=None) -> Spectrum:
    """Build a Spectrum from raw level data.

    Input may be unsorted and may contain duplicate values; duplicates are
    merged by summing their degeneracies. Omitted degeneracies default to 1.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("values must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(vals)):
        raise ValueError("values must be finite")
    if degeneracies is None:
        degs = np.ones(vals.size, dtype=np.int64)
    else:
        degs = np.asarray(degeneracies)
        if degs.shape != vals.shape:
            raise ValueError("degeneracies must match values in length")
        as_int = degs.astype(np.int64)
        if not np.array_equal(as_int, degs):
            raise ValueError("degeneracies must be integers")
        degs = as_int
        if np.any(degs < 1):
            raise ValueError("degeneracies must be >= 1")
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    degs = degs[order]
    out_vals = []
    out_degs = []
    for v, g in zip(vals.tolist(), degs.tolist()):
        if out_vals and v == out_vals[-1]:
            out_degs[-1] += g
        else:
            out_vals.append(v)
            out_degs.append(g)
    return Spectrum(kind, np.array(out_vals), np.array(out_degs, dtype=np.int64))


@dataclass(frozen=True)
class HarmonicParams:
    """Physical parameters of the equally spaced half-offset time spectrum.

    The time quantum d = hbar^2 * omega / (mass^2 * c^4) is derived, never
    supplied: `d` is computed from the four inputs so the identity holds
    exactly as written. Use `from_time_quantum` to specify d directly
    (it sets hbar = mass = c = 1, omega = d).
    """

    hbar: float
    mass: float
    omega: float
    c: float
    d: float = field(init=False)

    def __post_init__(self):
        for name in ("hbar", "mass", "omega", "c"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be finite and > 0, got {val!r}")
        d = self.hbar * self.hbar * self.omega / (self.mass * self.mass * self.c**4)
        if not (np.isfinite(d) and d > 0):
            raise ValueError(f"time quantum overflowed or vanished: d={d!r}")
        object.__setattr__(self, "d", float(d))

    @classmethod
    def from_time_quantum(cls, d: float) -> "HarmonicParams":
        return cls(hbar=1.0, mass=1.0, omega=float(d), c=1.0)


def harmonic_time_spectrum(params: HarmonicParams, n_max: int) -> Spectrum:
    """Levels t_n = d*(n + 1/2) for n = 0..n_max, degeneracy 1 each."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    n = np.arange(n_max + 1, dtype=np.float64)
    t = params.d * (n + 0.5)
    if not np.all(np.isfinite(t)):
        raise OverflowError(f"level values overflow at n_max={n_max} with d={params.d}")
    # Spectrum() rejects equal consecutive values, catching precision loss at extreme n_max
    return Spectrum(KIND_TIME, t, np.ones(t.size, dtype=np.int64))


def truncate_by_tail_mass(spectrum: Spectrum, rate: float, epsilon: float) -> Spectrum:
    """Keep the shortest level prefix whose Boltzmann tail mass is below epsilon.

    Tail mass of a cut at index j is sum_{i>=j} g_i e^{-rate(x_i - x_0)}
    normalized by the same sum over all levels of the input. The rule is
    applied repeatedly until nothing changes, which makes the operation
    exactly idempotent; in non-adversarial use the first pass is final.
    Never returns fewer than 2 levels when the input has at least 2.
    """
    if not (np.isfinite(rate) and rate > 0):
        raise ValueError(f"rate must be finite and > 0 for tail truncation, got {rate!r}")
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    values = spectrum.values
    degs = spectrum.degeneracies
    floor = 2 if spectrum.count >= 2 else 1
    changed = False
    while True:
        w = degs * np.exp(-rate * (values - values[0]))
        suffix = np.cumsum(w[::-1])[::-1]
        total = suffix[0]
        below = np.nonzero(suffix < epsilon * total)[0]
        cut = int(below[0]) if below.size else values.size
        keep = max(cut, floor)
        if keep >= values.size:
            break
        values = values[:keep]
        degs = degs[:keep]
        changed = True
    if not changed:
        return spectrum
    return Spectrum(spectrum.kind, values, degs)


def read_spectrum_file(path) -> Spectrum:
    """Parse the plain-text spectrum format.

    Lines starting with '#' (or trailing '#' fragments) are comments. The
    first payload line must be a header `kind: energy` or `kind: time`;
    every following payload line is `value` or `value degeneracy`.
    """
    text = Path(path).read_text()
    kind = None
    values = []
    degs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind is None:
            head, sep, tail = line.partition(":")
            if head.strip().lower() != "kind" or not sep:
                raise ValueError(f"{path}:{lineno}: expected header 'kind: energy|time'")
            kind = tail.strip().lower()
            if kind not in _KINDS:
                raise ValueError(f"{path}:{lineno}: unknown kind {kind!r}")
            continue
        parts = line.split()
        if len(parts) > 2:
            raise ValueError(f"{path}:{lineno}: expected 'value [degeneracy]', got {raw!r}")
        try:
            value = float(parts[0])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value {parts[0]!r}") from None
        if len(parts) == 2:
            try:
                deg = int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad degeneracy {parts[1]!r}") from None
        else:
            deg = 1
        values.append(value)
        degs.append(deg)
    if kind is None:
        raise ValueError(f"{path}: missing 'kind:' header")
    if not values:
        raise ValueError(f"{path}: no levels found")
    return make_explicit_spectrum(kind, values, degs)


def write_spectrum_file(path, spectrum: Spectrum) -> None:
    """Inverse of read_spectrum_file."""
    lines = [f"kind: {spectrum.kind}"]
    for v, g in zip(spectrum.values.tolist(), spectrum.degeneracies.tolist()):
        lines.append(f"{v!r} {g}" if g != 1 else f"{v!r}")
    Path(path).write_text("\n".join(lines) + "\n")
