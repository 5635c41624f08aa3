"""Compare the compiled kernel backend against the pure-Python fallback.

Times the three hot paths (log-partition reduction, weighted moments inside
a full rate solve, alias-table sampling) on both backends and checks that
they agree. Run as:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import importlib
import time

import numpy as np

import tempens
from tempens import _backend, _kernels_py
from tempens import ensemble, maxent
from tempens.rng import substream

try:
    from tempens import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _with_backend(module):
    """Temporarily point the shared backend at a specific kernel module."""
    saved = (_backend.kernels, _backend.comp_sum, _backend.comp_dot,
             _backend.logsumexp, _backend.alias_build, _backend.alias_counts)
    _backend.kernels = module
    _backend.comp_sum = module.comp_sum
    _backend.comp_dot = module.comp_dot
    _backend.logsumexp = module.logsumexp
    _backend.alias_build = module.alias_build
    _backend.alias_counts = module.alias_counts
    return saved


def _restore(saved) -> None:
    (_backend.kernels, _backend.comp_sum, _backend.comp_dot,
     _backend.logsumexp, _backend.alias_build, _backend.alias_counts) = saved


def main() -> None:
    if _kernels is None:
        print("compiled backend unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    n_levels = 10_000
    values = np.sort(rng.uniform(0.0, 10.0, size=n_levels))
    values[0] = 0.0
    spectrum = tempens.make_explicit_spectrum("time", np.unique(values))
    terms = -1.5 * spectrum.values
    weights = tempens.boltzmann_weights(spectrum, 1.5)
    n_draws = 1_000_000
    gen = substream(12345, 0)
    u = gen.random(n_draws)
    v = gen.random(n_draws)

    rows = []
    agree = {}
    results = {}
    for name, module in (("compiled", _kernels), ("python", _kernels_py)):
        saved = _with_backend(module)
        try:
            t_logz = _time(lambda: module.logsumexp(terms))
            t_solve = _time(
                lambda: maxent.solve_rate_for_mean(spectrum, ensemble.mean(weights)), repeat=3
            )
            accept, alias = module.alias_build(weights.probs)
            t_build = _time(lambda: module.alias_build(weights.probs))
            t_draw = _time(lambda: module.alias_counts(accept, alias, u, v), repeat=3)
            results[name] = {
                "logz": module.logsumexp(terms),
                "rate": maxent.solve_rate_for_mean(spectrum, ensemble.mean(weights)).rate,
                "counts": module.alias_counts(accept, alias, u, v),
                "tables": (accept, alias),
            }
            rows.append((name, t_logz, t_solve, t_build, t_draw))
        finally:
            _restore(saved)

    agree["logsumexp"] = abs(results["compiled"]["logz"] - results["python"]["logz"])
    agree["solved rate"] = abs(results["compiled"]["rate"] - results["python"]["rate"])
    agree["alias accept max dev"] = float(
        np.abs(results["compiled"]["tables"][0] - results["python"]["tables"][0]).max()
    )
    shared_counts = _kernels.alias_counts(*results["python"]["tables"], u, v)
    fallback_counts = _kernels_py.alias_counts(*results["python"]["tables"], u, v)
    agree["counts (shared tables)"] = int(np.abs(shared_counts - fallback_counts).max())

    print(f"spectrum: {spectrum.count} levels; draws: {n_draws}")
    print(f"{'backend':<10} {'logsumexp':>12} {'full solve':>12} {'alias build':>12} {'1e6 draws':>12}")
    for name, t_logz, t_solve, t_build, t_draw in rows:
        print(f"{name:<10} {t_logz:>12.6f} {t_solve:>12.6f} {t_build:>12.6f} {t_draw:>12.6f}")
    comp = dict((r[0], r) for r in rows)
    speedups = [
        comp["python"][i] / comp["compiled"][i] if comp["compiled"][i] > 0 else float("inf")
        for i in range(1, 5)
    ]
    print(f"{'speedup':<10} " + " ".join(f"{s:>12.1f}x"[:13] for s in speedups))
    print("\nagreement:")
    for key, dev in agree.items():
        print(f"  {key}: max deviation {dev}")


if __name__ == "__main__":
    main()
