"""Rate-from-mean inversion and maximum-entropy diagnostics.

mean_vs_rate is strictly decreasing with derivative -variance, so the inverse
problem is solved by a bracketed Newton iteration with bisection fallback.
Two independent diagnostics guard the construction:

* finite_difference_rate_check: along the canonical family, the ratio of the
  mean's derivative to the trace-entropy's derivative is -1/rate exactly
  (d(entropy)/d(rate) = -rate * d(mean)/d(rate), since sum dp_i = 0); the
  central-difference estimate must reproduce 1/rate at second order.
* maxent_verify: among all distributions with the same mean, the canonical
  weights maximize entropy; random mean-preserving perturbations must never
  gain entropy beyond rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ensemble
from .rng import substream
from .spectra import Spectrum

RATE_MIN = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


class UnattainableTargetError(ValueError):
    """Target mean outside the open attainable interval."""


class ConvergenceError(ArithmeticError):
    """Iteration budget exhausted before the residual tolerance was met."""


@dataclass(frozen=True)
class LambdaSolveResult:
    rate: float
    iterations: int
    residual: float  # target mean minus achieved mean
    bracket: tuple[float, float]


@dataclass(frozen=True)
class DerivativeCheckReport:
    rate: float
    fd_ratio: float
    analytic_oracle: float  # 1 / rate
    step: float
    abs_error: float


@dataclass(frozen=True)
class MaxentReport:
    max_gain: float
    trials: int
    seed: int
    step: float
    mean_preserved: bool


def mean_vs_rate(spectrum: Spectrum, rate: float) -> float:
    """Ensemble mean as a function of rate (strictly decreasing)."""
    return ensemble.mean(ensemble.boltzmann_weights(spectrum, rate))


def attainable_mean_interval(spectrum: Spectrum, rate_min: float = RATE_MIN) -> tuple[float, float]:
    """Open interval of means reachable with rate in (rate_min, +inf)."""
    return float(spectrum.values[0]), mean_vs_rate(spectrum, rate_min)


def solve_rate_for_mean(
    spectrum: Spectrum,
    target_mean: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    rate_min: float = RATE_MIN,
) -> LambdaSolveResult:
    """Invert mean_vs_rate by safeguarded Newton iteration.

    The Newton step uses the analytic derivative d(mean)/d(rate) = -variance
    and is clamped to a maintained sign-change bracket (bisection fallback).
    Stops when |mean(rate) - target| <= tol, then takes one extra polish step
    so the returned rate sits at the quadratic-convergence floor rather than
    at tol/variance.
    """
    if spectrum.count < 2:
        raise ValueError("rate solving needs at least 2 distinct levels")
    if not np.isfinite(target_mean):
        raise ValueError(f"target mean must be finite, got {target_mean!r}")
    lo_mean, hi_mean = attainable_mean_interval(spectrum, rate_min)
    if not (lo_mean < target_mean < hi_mean):
        raise UnattainableTargetError(
            f"target mean {target_mean!r} is outside the attainable open interval "
            f"({lo_mean!r}, {hi_mean!r})"
        )

    evals = 0

    def f(rate: float) -> tuple[float, float]:
        nonlocal evals
        evals += 1
        w = ensemble.boltzmann_weights(spectrum, rate)
        return ensemble.mean(w) - target_mean, ensemble.variance(w)

    # geometric bracket expansion around the spectrum's natural rate scale
    span = float(spectrum.values[-1] - spectrum.values[0])
    x = 1.0 / span
    fx, vx = f(x)
    lo, hi = rate_min, None
    if fx > 0:
        lo = x
        step_out = x
        while evals < max_iter:
            step_out *= 2.0
            cand = lo + step_out
            fc, vc = f(cand)
            if fc <= 0:
                hi = cand
                x, fx, vx = cand, fc, vc
                break
            lo = cand
        if hi is None:
            raise ConvergenceError(f"bracket expansion exhausted {max_iter} evaluations")
    else:
        hi = x
        while evals < max_iter:
            cand = max(x / 2.0, rate_min)
            fc, vc = f(cand)
            if fc > 0:
                lo = cand
                break
            hi = cand
            x, fx, vx = cand, fc, vc
            if cand == rate_min:
                # attainability guaranteed f(rate_min) > 0; numerical knife edge
                lo = rate_min
                break
        else:
            raise ConvergenceError(f"bracket expansion exhausted {max_iter} evaluations")

    # safeguarded Newton on the bracket [lo, hi], f(lo) > 0 > f(hi)
    converged = abs(fx) <= tol
    while not converged:
        if evals >= max_iter:
            raise ConvergenceError(
                f"no convergence within {max_iter} evaluations: residual {fx:.3e} at rate {x!r}"
            )
        if fx > 0:
            lo = x
        else:
            hi = x
        cand = x + fx / vx if vx > 0 else math.nan
        if not math.isfinite(cand) or not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        if cand == x:  # bracket collapsed to adjacent floats
            break
        x = cand
        fx, vx = f(x)
        converged = abs(fx) <= tol
    # quadratic polish: push the residual to the rounding floor so the rate
    # error is residual/variance at machine scale, not tol/variance; a step
    # is kept only if it actually improves
    for _ in range(2):
        if vx <= 0 or fx == 0.0 or evals >= max_iter:
            break
        cand = x + fx / vx
        if not math.isfinite(cand) or not (lo <= cand <= hi) or cand == x:
            break
        fc, vc = f(cand)
        if abs(fc) < abs(fx):
            x, fx, vx = cand, fc, vc
        else:
            break
    if abs(fx) > tol:
        raise ConvergenceError(
            f"no convergence within {max_iter} evaluations: residual {fx:.3e} at rate {x!r}"
        )
    return LambdaSolveResult(
        rate=float(x),
        iterations=evals,
        residual=float(-fx),
        bracket=(float(lo), float(hi)),
    )


def harmonic_mean_closed_form(d: float, rate: float) -> float:
    """(d/2) * coth(rate * d / 2): mean of the infinite half-offset spectrum.

    Note the overall factor of d: the d = 1 specialization (1/2) coth(rate/2)
    is sometimes quoted as if it were general, but the general form must carry
    the quantum. Limits: -> 1/rate as rate*d -> 0, -> d/2 as rate*d -> inf.
    """
    if not (np.isfinite(d) and d > 0):
        raise ValueError(f"d must be finite and > 0, got {d!r}")
    if not (np.isfinite(rate) and rate > 0):
        raise ValueError(f"rate must be finite and > 0, got {rate!r}")
    x = 0.5 * rate * d
    if x == 0.0:
        raise OverflowError(f"rate*d = {rate * d!r} underflows; mean is out of float range")
    out = (0.5 * d) / math.tanh(x)
    if not math.isfinite(out):
        raise OverflowError(f"closed-form mean overflows for d={d!r}, rate={rate!r}")
    return out


def harmonic_rate_closed_form(d: float, mean: float) -> float:
    """Inverse of harmonic_mean_closed_form: rate = (2/d) atanh(d / (2 mean))."""
    if not (np.isfinite(d) and d > 0):
        raise ValueError(f"d must be finite and > 0, got {d!r}")
    if not (np.isfinite(mean) and mean > d / 2):
        raise UnattainableTargetError(
            f"mean {mean!r} is outside the attainable open interval ({d / 2!r}, inf)"
        )
    return (2.0 / d) * math.atanh(d / (2.0 * mean))


def finite_difference_rate_check(spectrum: Spectrum, rate: float, step: float) -> DerivativeCheckReport:
    """Central-difference estimate of -d(mean)/d(entropy_trace) vs 1/rate.

    The two readings of the temperature analogy differ here: differentiating
    along the canonical family gives exactly 1/rate (the implemented oracle);
    the direct identification of the ratio with rate itself agrees only at
    rate = 1 and is reported by the CLI for comparison, never asserted.
    """
    if spectrum.count < 2:
        raise ValueError("derivative check needs >= 2 levels (entropy is constant otherwise)")
    if not (np.isfinite(rate) and rate > 0):
        raise ValueError(f"rate must be finite and > 0, got {rate!r}")
    if not (np.isfinite(step) and 0 < step < rate):
        raise ValueError(f"step must satisfy 0 < step < rate, got {step!r}")
    w_hi = ensemble.boltzmann_weights(spectrum, rate + step)
    w_lo = ensemble.boltzmann_weights(spectrum, rate - step)
    du = ensemble.mean(w_hi) - ensemble.mean(w_lo)
    ds = ensemble.entropy_trace(w_hi) - ensemble.entropy_trace(w_lo)
    if ds == 0.0:
        raise FloatingPointError("entropy difference vanished; step too small for this spectrum")
    fd_ratio = -du / ds
    oracle = 1.0 / rate
    return DerivativeCheckReport(
        rate=float(rate),
        fd_ratio=float(fd_ratio),
        analytic_oracle=oracle,
        step=float(step),
        abs_error=abs(fd_ratio - oracle),
    )


def _constraint_null_basis(spectrum: Spectrum, preserve_mean: bool) -> np.ndarray:
    n = spectrum.count
    rows = [np.ones(n)]
    if preserve_mean:
        rows.append(spectrum.values.astype(np.float64))
    m = np.vstack(rows)
    _, s, vt = np.linalg.svd(m)
    rank = int(np.sum(s > s[0] * n * np.finfo(np.float64).eps))
    return vt[rank:].T  # orthonormal columns spanning the constraint null space


def maxent_verify(
    weights: ensemble.GibbsWeights,
    trials: int,
    step: float,
    seed: int,
    preserve_mean: bool = True,
) -> MaxentReport:
    """Probe the entropy maximality of canonical weights.

    Each trial perturbs the weights along a random direction in the null
    space of the active constraints (normalization, and the mean unless
    preserve_mean=False), rescaling the step whenever a component would go
    negative, and records the entropy change. With preserve_mean=True the
    maximum gain must not exceed rounding noise (~1e-12); with
    preserve_mean=False the constraint is deliberately broken and positive
    gains are expected -- the negative control.

    Trial t draws from substream(seed, t), so any execution schedule yields
    identical results.
    """
    if weights.spectrum.count < 3:
        raise ValueError("maxent verification needs >= 3 levels for a nontrivial null space")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not (np.isfinite(step) and step >= 0):
        raise ValueError(f"step must be finite and >= 0, got {step!r}")
    p = weights.probs
    g = weights.spectrum.degeneracies
    basis = _constraint_null_basis(weights.spectrum, preserve_mean)
    s_base = -ensemble._entropy_sum(p, g)
    max_gain = -math.inf
    for t in range(trials):
        rng = substream(seed, t)
        direction = basis @ (basis.T @ rng.standard_normal(p.size))
        norm = float(np.linalg.norm(direction))
        if norm == 0.0 or step == 0.0:
            max_gain = max(max_gain, 0.0)
            continue
        delta = direction * (step / norm)
        pert = p + delta
        bad = pert < 0
        if np.any(bad):
            # shrink along the same direction; constraints are linear so any
            # scale preserves them
            alpha = 0.5 * float(np.min(p[bad] / (p[bad] - pert[bad])))
            pert = p + alpha * delta
            pert = np.maximum(pert, 0.0)
        gain = (-ensemble._entropy_sum(pert, g)) - s_base
        max_gain = max(max_gain, gain)
    return MaxentReport(
        max_gain=float(max_gain),
        trials=trials,
        seed=seed,
        step=float(step),
        mean_preserved=preserve_mean,
    )
