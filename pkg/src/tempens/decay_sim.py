"""Monte Carlo decay sampling, survival curves, and rate estimation.

n independent systems each decay at one spectrum level, drawn from the
canonical weights; counts are therefore multinomial. Draws use a Walker/Vose
alias table (built once per call, O(1) per draw) fed by counter-based Philox
substreams keyed by (seed, shard index): the result depends only on
(probs, n, seed, shards), never on how many workers executed the shards.

The maximum-likelihood rate estimate for this exponential family is moment
matching: solve mean_vs_rate(rate) = sample mean.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend as backend
from . import ensemble, maxent
from .ensemble import GibbsWeights, SurvivalCurve
from .rng import substream
from .spectra import KIND_TIME, Spectrum

DEFAULT_SHARDS = 8
POOL_THRESHOLD = 5.0


class DegenerateSampleError(ValueError):
    """Sample admits no finite positive maximum-likelihood rate."""


@dataclass(frozen=True)
class DecaySample:
    """Multinomial decay counts per spectrum level."""

    spectrum: Spectrum
    counts: np.ndarray
    n_total: int
    seed: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != self.spectrum.values.shape:
            raise ValueError("counts must have one entry per spectrum level")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if int(counts.sum()) != self.n_total:
            raise ValueError(f"counts sum to {int(counts.sum())}, expected n_total={self.n_total}")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class FitResult:
    lambda_hat: float
    stderr: float
    log_likelihood: float
    solve: maxent.LambdaSolveResult


def sample_decay_times(
    weights: GibbsWeights,
    n: int,
    seed: int,
    shards: int = DEFAULT_SHARDS,
    workers: int = 1,
) -> DecaySample:
    """Draw n decay times from the canonical weights.

    The n draws are split into `shards` balanced chunks; chunk i consumes
    substream(seed, i). `workers` only parallelizes shard execution and never
    changes the result.
    """
    if weights.spectrum.kind != KIND_TIME:
        raise ValueError("decay sampling requires a time spectrum")
    if n < 1:
        raise ValueError("n must be >= 1")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    accept, alias = backend.alias_build(weights.probs)
    base, extra = divmod(n, shards)
    sizes = [base + (1 if i < extra else 0) for i in range(shards)]

    def draw(shard: int) -> np.ndarray:
        rng = substream(seed, shard)
        u = rng.random(sizes[shard])
        v = rng.random(sizes[shard])
        return backend.alias_counts(accept, alias, u, v)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, shards)) as pool:
            per_shard = list(pool.map(draw, range(shards)))
    else:
        per_shard = [draw(i) for i in range(shards)]
    counts = np.sum(per_shard, axis=0, dtype=np.int64)
    return DecaySample(spectrum=weights.spectrum, counts=counts, n_total=n, seed=seed)


def empirical_survival(sample: DecaySample) -> SurvivalCurve:
    """Observed survivors at each level: n_total minus decays before it.

    Starts at n_total at the first level; t0 reports the first level time.
    """
    counts = sample.counts
    decayed_before = np.concatenate(([0], np.cumsum(counts)[:-1]))
    survivors = sample.n_total - decayed_before
    t = sample.spectrum.values
    return SurvivalCurve(
        t0=float(t[0]), times=t, counts=survivors.astype(np.float64), n0=float(sample.n_total)
    )


def expected_survival(weights: GibbsWeights, n: float) -> SurvivalCurve:
    """Multinomial expectation of empirical_survival: n * P(T >= t_i).

    For an equally spaced time spectrum this equals n * exp(-rate*(t_i - t_0))
    up to the truncated tail, i.e. the exponential decay law measured from the
    first level.
    """
    if weights.spectrum.kind != KIND_TIME:
        raise ValueError("survival curves are defined for time spectra only")
    t = weights.spectrum.values
    upper = np.cumsum(weights.probs[::-1])[::-1]
    return SurvivalCurve(t0=float(t[0]), times=t, counts=n * upper, n0=float(n))


def estimate_lambda(sample: DecaySample, tol: float = maxent.DEFAULT_TOL) -> FitResult:
    """Maximum-likelihood decay rate with its asymptotic standard error.

    MLE = moment matching; stderr = 1/sqrt(n * variance at the fitted rate)
    (observed Fisher information of the exponential family).
    """
    counts = sample.counts
    x = sample.spectrum.values
    n = sample.n_total
    if counts[0] == n:
        raise DegenerateSampleError("all decays at the minimum level: rate MLE diverges to +inf")
    if counts[-1] == n:
        raise DegenerateSampleError("all decays at the maximum level: rate MLE is non-positive")
    sample_mean = backend.comp_dot(counts.astype(np.float64), x) / n
    try:
        solve = maxent.solve_rate_for_mean(sample.spectrum, sample_mean, tol=tol)
    except maxent.UnattainableTargetError as exc:
        raise DegenerateSampleError(
            f"sample mean {sample_mean!r} admits no positive finite rate: {exc}"
        ) from exc
    fitted = ensemble.boltzmann_weights(sample.spectrum, solve.rate)
    var = ensemble.variance(fitted)
    stderr = 1.0 / np.sqrt(n * var)
    mask = counts > 0
    p = fitted.probs[mask]
    if np.any(p == 0):
        log_likelihood = -np.inf
    else:
        log_likelihood = backend.comp_dot(counts[mask].astype(np.float64), np.log(p))
    return FitResult(
        lambda_hat=float(solve.rate),
        stderr=float(stderr),
        log_likelihood=float(log_likelihood),
        solve=solve,
    )


def goodness_of_fit(sample: DecaySample, weights: GibbsWeights, fitted: bool = False) -> tuple[float, int]:
    """Pearson chi-square of the counts against the canonical weights.

    Low-expectation tail levels are pooled from the right until the last bin's
    expected count reaches 5. Returns (chi2, dof) with dof = bins - 1, minus
    one more when `fitted` says the weights were estimated from this sample.
    """
    if sample.spectrum is not weights.spectrum and not (
        np.array_equal(sample.spectrum.values, weights.spectrum.values)
        and np.array_equal(sample.spectrum.degeneracies, weights.spectrum.degeneracies)
    ):
        raise ValueError("sample and weights must share a spectrum")
    observed = [float(c) for c in sample.counts]
    expected = [sample.n_total * p for p in weights.probs.tolist()]
    while len(expected) >= 2 and expected[-1] < POOL_THRESHOLD:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        del expected[-1], observed[-1]
    if len(expected) < 2:
        raise ValueError("fewer than 2 bins remain after pooling; sample too small for chi-square")
    if min(expected) < POOL_THRESHOLD:
        raise ValueError(
            "an interior bin has expected count below 5; tail pooling cannot repair this"
        )
    chi2 = backend.comp_sum(
        np.array([(o - e) ** 2 / e for o, e in zip(observed, expected)], dtype=np.float64)
    )
    dof = len(expected) - 1 - (1 if fitted else 0)
    return float(chi2), dof
