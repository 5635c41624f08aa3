"""Command-line interface.

Four subcommands: ensemble (weights and observables at a given rate), solve
(rate from a target mean), simulate (Monte Carlo decay + fit), verify
(numerical identity checks). Configuration comes from an optional config file
(flat key=value lines or a JSON object) plus per-field override flags.

Reports are JSON with a fixed schema tag ("tempens/1"); tabular output is CSV
with '.' decimal separator, ',' field separator, a header row, and floats
printed with 17 significant digits (round-trip exact). Outputs are
byte-deterministic functions of the model configuration: execution knobs
(output_dir, workers) are excluded from the echo.

Exit codes: 0 success, 2 config error, 3 numeric error, 4 unattainable
target, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import decay_sim, ensemble, maxent, operator_algebra
from .rng import substream
from .spectra import (
    KIND_ENERGY,
    KIND_TIME,
    HarmonicParams,
    Spectrum,
    harmonic_time_spectrum,
    read_spectrum_file,
    truncate_by_tail_mass,
)

SCHEMA = "tempens/1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_UNATTAINABLE = 4
EXIT_VERIFICATION = 5

VERIFY_MAX_LEVELS = 64


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    spectrum: str | None = None
    d: float | None = None
    hbar: float | None = None
    mass: float | None = None
    omega: float | None = None
    c: float | None = None
    n_max: int | None = None
    rate: float | None = None
    target_mean: float | None = None
    n_particles: int | None = None
    seed: int | None = None
    shards: int = decay_sim.DEFAULT_SHARDS
    workers: int = 1
    tail_epsilon: float = 1e-16
    tol: float = 1e-10
    persistence_l: float | None = None
    kb: float | None = None
    output_dir: str = "."


_INT_FIELDS = {"n_max", "n_particles", "seed", "shards", "workers"}
_FLOAT_FIELDS = {
    "d", "hbar", "mass", "omega", "c", "rate", "target_mean",
    "tail_epsilon", "tol", "persistence_l", "kb",
}
_STR_FIELDS = {"spectrum", "output_dir"}
_ALL_FIELDS = {f.name for f in fields(RunConfig)}
# execution-only knobs: never part of the result-determining echo
_ECHO_EXCLUDED = {"output_dir", "workers"}


def _coerce(key: str, value) -> object:
    try:
        if key in _INT_FIELDS:
            if isinstance(value, str):
                return int(value, 0)
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(value)
            return int(value)
        if key in _FLOAT_FIELDS:
            return float(value)
        if key in _STR_FIELDS:
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    raise ConfigError(f"unknown config key: {key}")


def _parse_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    stripped = text.lstrip()
    raw: dict = {}
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object")
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            raw[key.strip()] = value.strip()
    return raw


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        for key, value in _parse_config_file(args.config).items():
            if key not in _ALL_FIELDS:
                raise ConfigError(f"unknown config key: {key}")
            values[key] = _coerce(key, value)
    for key in _ALL_FIELDS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = _coerce(key, flag_value)
    config = RunConfig(**values)
    if config.tol <= 0 or not np.isfinite(config.tol):
        raise ConfigError(f"tol must be finite and > 0, got {config.tol!r}")
    if not (0.0 < config.tail_epsilon < 1.0):
        raise ConfigError(f"tail_epsilon must lie in (0, 1), got {config.tail_epsilon!r}")
    if config.shards < 1:
        raise ConfigError("shards must be >= 1")
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    if config.rate is not None and config.target_mean is not None:
        raise ConfigError("rate and target_mean are mutually exclusive; supply exactly one")
    return config


def _config_echo(config: RunConfig) -> dict:
    echo = {}
    for f in fields(RunConfig):
        if f.name in _ECHO_EXCLUDED:
            continue
        value = getattr(config, f.name)
        if value is not None:
            echo[f.name] = value
    return echo


def _harmonic_params(config: RunConfig) -> HarmonicParams | None:
    physical = [config.hbar, config.mass, config.omega, config.c]
    if config.d is not None:
        if any(v is not None for v in physical):
            raise ConfigError("give either d or the four physical parameters, not both")
        return HarmonicParams.from_time_quantum(config.d)
    if any(v is not None for v in physical):
        if any(v is None for v in physical):
            raise ConfigError("harmonic spectra need all of hbar, mass, omega, c (or just d)")
        return HarmonicParams(hbar=config.hbar, mass=config.mass, omega=config.omega, c=config.c)
    return None


def _load_spectrum(config: RunConfig, truncate_rate: float | None) -> Spectrum:
    """Build the working spectrum from the configured source.

    Harmonic sources are generated up to n_max and, when a rate is in play,
    truncated by tail mass; file spectra are taken as given.
    """
    params = _harmonic_params(config)
    if config.spectrum is not None and params is not None:
        raise ConfigError("spectrum file and harmonic parameters are mutually exclusive")
    if config.spectrum is not None:
        try:
            spec = read_spectrum_file(config.spectrum)
        except OSError as exc:
            raise ConfigError(f"cannot read spectrum file: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif params is not None:
        if config.n_max is None:
            raise ConfigError("harmonic spectra need n_max")
        spec = harmonic_time_spectrum(params, config.n_max)
        if truncate_rate is not None and truncate_rate > 0:
            spec = truncate_by_tail_mass(spec, truncate_rate, config.tail_epsilon)
    else:
        raise ConfigError("no spectrum source: give spectrum=<file> or harmonic parameters")
    if spec.kind == KIND_TIME and spec.values[0] < 0:
        print(
            f"warning: time spectrum contains negative values (min {spec.values[0]!r})",
            file=sys.stderr,
        )
    return spec


def _check(name: str, value: float, tolerance: float) -> dict:
    return {
        "name": name,
        "value": float(value),
        "tolerance": float(tolerance),
        "pass": bool(abs(value) <= tolerance),
    }


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2))
        fh.write("\n")


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _finish(payload: dict, checks: list[dict]) -> int:
    payload["checks"] = checks
    if any(not c["pass"] for c in checks):
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_ensemble(config: RunConfig) -> int:
    if config.rate is None:
        raise ConfigError("ensemble needs rate")
    spec = _load_spectrum(config, truncate_rate=config.rate)
    weights = ensemble.boltzmann_weights(spec, config.rate)
    results = {
        "kind": spec.kind,
        "levels": spec.count,
        "log_partition": ensemble.log_partition_function(spec, config.rate),
        "mean": ensemble.mean(weights),
        "variance": ensemble.variance(weights),
        "entropy_trace": ensemble.entropy_trace(weights),
    }
    if spec.kind == KIND_TIME and config.persistence_l is not None:
        results["persistence"] = ensemble.persistence(config.rate, config.persistence_l)
    if spec.kind == KIND_ENERGY and config.kb is not None:
        if config.kb <= 0:
            raise ConfigError("kb must be > 0")
        results["temperature_equivalent"] = config.rate / config.kb
    checks = [
        _check("normalization_error", float(np.sum(weights.probs)) - 1.0, ensemble.NORMALIZATION_TOL),
        _check(
            "entropy_identity_error",
            ensemble.entropy_trace(weights) + config.rate * results["mean"] + results["log_partition"],
            ensemble.ENTROPY_IDENTITY_TOL,
        ),
    ]
    payload = {
        "schema": SCHEMA,
        "command": "ensemble",
        "config_echo": _config_echo(config),
        "results": results,
    }
    code = _finish(payload, checks)
    out = Path(config.output_dir)
    _write_json(out / "ensemble.json", payload)
    _write_csv(out / "weights.csv", ["value", "probability"], [spec.values, weights.probs])
    return code


def cmd_solve(config: RunConfig) -> int:
    if config.target_mean is None:
        raise ConfigError("solve needs target_mean")
    spec = _load_spectrum(config, truncate_rate=None)
    solved = maxent.solve_rate_for_mean(spec, config.target_mean, tol=config.tol)
    results = {
        "rate": solved.rate,
        "iterations": solved.iterations,
        "residual": solved.residual,
        "bracket": list(solved.bracket),
    }
    params = _harmonic_params(config)
    if params is not None:
        results["closed_form_rate"] = maxent.harmonic_rate_closed_form(params.d, config.target_mean)
    checks = [_check("mean_residual", solved.residual, config.tol)]
    payload = {
        "schema": SCHEMA,
        "command": "solve",
        "config_echo": _config_echo(config),
        "results": results,
    }
    code = _finish(payload, checks)
    _write_json(Path(config.output_dir) / "solve.json", payload)
    return code


def cmd_simulate(config: RunConfig) -> int:
    if config.rate is None:
        raise ConfigError("simulate needs rate")
    if config.n_particles is None or config.n_particles < 1:
        raise ConfigError("simulate needs n_particles >= 1")
    if config.seed is None:
        raise ConfigError("simulate needs seed")
    spec = _load_spectrum(config, truncate_rate=config.rate)
    weights = ensemble.boltzmann_weights(spec, config.rate)
    sample = decay_sim.sample_decay_times(
        weights, config.n_particles, config.seed, shards=config.shards, workers=config.workers
    )
    empirical = decay_sim.empirical_survival(sample)
    expected = decay_sim.expected_survival(weights, config.n_particles)
    results: dict = {
        "kind": spec.kind,
        "levels": spec.count,
        "n_total": sample.n_total,
        "counts": sample.counts.tolist(),
    }
    checks: list[dict] = []
    degenerate_exit = False
    try:
        fit = decay_sim.estimate_lambda(sample, tol=config.tol)
        fit_payload = {
            "status": "ok",
            "lambda_hat": fit.lambda_hat,
            "stderr": fit.stderr,
            "log_likelihood": fit.log_likelihood,
            "iterations": fit.solve.iterations,
        }
        fitted_weights = ensemble.boltzmann_weights(spec, fit.lambda_hat)
        try:
            chi2, dof = decay_sim.goodness_of_fit(sample, fitted_weights, fitted=True)
            fit_payload["chi2"] = chi2
            fit_payload["dof"] = dof
        except ValueError as exc:
            fit_payload["chi2"] = None
            fit_payload["dof"] = None
            fit_payload["chi2_note"] = str(exc)
    except decay_sim.DegenerateSampleError as exc:
        fit_payload = {"status": "degenerate", "reason": str(exc)}
        degenerate_exit = True
    results["fit"] = fit_payload
    payload = {
        "schema": SCHEMA,
        "command": "simulate",
        "config_echo": _config_echo(config),
        "results": results,
    }
    code = _finish(payload, checks)
    out = Path(config.output_dir)
    _write_json(out / "simulate.json", payload)
    _write_csv(
        out / "survival.csv",
        ["time", "expected_survivors", "observed_survivors"],
        [spec.values, expected.counts, empirical.counts],
    )
    if degenerate_exit:
        print("error: degenerate sample, rate MLE not finite (report written)", file=sys.stderr)
        return EXIT_NUMERIC
    return code


def cmd_verify(config: RunConfig) -> int:
    if config.rate is None:
        raise ConfigError("verify needs rate")
    seed = config.seed if config.seed is not None else 0
    spec = _load_spectrum(config, truncate_rate=config.rate)
    if spec.count > VERIFY_MAX_LEVELS:
        raise ConfigError(
            f"verify runs operator checks; spectrum must have <= {VERIFY_MAX_LEVELS} levels, got {spec.count}"
        )
    if np.any(spec.degeneracies != 1):
        raise ConfigError("verify needs unit degeneracies (each level one state)")
    weights = ensemble.boltzmann_weights(spec, config.rate)
    log_z = weights.log_partition
    mean_value = ensemble.mean(weights)

    rho = operator_algebra.assemble_canonical_state(spec, config.rate)
    which = operator_algebra.GENERATOR_TIME if spec.kind == KIND_TIME else operator_algebra.GENERATOR_ENERGY
    gen = operator_algebra.generator_operator(spec, which)
    comm_norm = float(np.abs(operator_algebra.commutator(rho, gen)).max())

    taus = substream(seed, 0).uniform(-10.0, 10.0, size=20)
    drift = 0.0
    for tau in taus:
        rotated = operator_algebra.conjugate_by_generated_unitary(rho, gen, float(tau))
        drift = max(drift, float(np.abs(rotated.entries - rho.entries).max()))

    n = spec.count
    diag = np.real(np.diag(rho.entries))[np.arange(n) * n + np.arange(n)]
    diag_err = float(np.abs(diag - weights.probs).max())

    fd_step = 1e-4 * config.rate
    fd = maxent.finite_difference_rate_check(spec, config.rate, fd_step)

    checks = [
        _check("normalization_error", float(np.sum(weights.probs)) - 1.0, ensemble.NORMALIZATION_TOL),
        _check(
            "entropy_identity_error",
            ensemble.entropy_trace(weights) + config.rate * mean_value + log_z,
            ensemble.ENTROPY_IDENTITY_TOL,
        ),
        _check("commutator_max_norm", comm_norm, 1e-13),
        _check("conjugation_max_drift", drift, 1e-10),
        _check("diag_consistency_error", diag_err, 1e-12),
        _check("fd_ratio_times_rate_minus_1", fd.fd_ratio * config.rate - 1.0, 1e-5),
    ]
    results = {
        "kind": spec.kind,
        "levels": spec.count,
        "rate": config.rate,
        "fd_ratio": fd.fd_ratio,
        "reciprocal_rate_reading": fd.analytic_oracle,
        "direct_rate_reading": config.rate,
        "fd_note": (
            "the finite-difference ratio tracks 1/rate (the asserted reading); "
            "the direct reading 'ratio = rate' coincides only at rate = 1 and is "
            "listed for comparison"
        ),
    }
    if spec.count >= 3:
        report = maxent.maxent_verify(weights, trials=1000, step=0.01, seed=seed + 1)
        checks.append(_check("maxent_max_gain", max(report.max_gain, 0.0), 1e-12))
    else:
        results["maxent_note"] = "skipped: needs >= 3 levels"
    payload = {
        "schema": SCHEMA,
        "command": "verify",
        "config_echo": _config_echo(config),
        "results": results,
    }
    code = _finish(payload, checks)
    _write_json(Path(config.output_dir) / "verify.json", payload)
    if code == EXIT_VERIFICATION:
        print("error: verification checks failed (report written)", file=sys.stderr)
    return code


_COMMANDS = {
    "ensemble": cmd_ensemble,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value or JSON config file")
    sub.add_argument("--spectrum", help="spectrum file path")
    sub.add_argument("--d", help="time quantum of the harmonic spectrum")
    sub.add_argument("--hbar")
    sub.add_argument("--mass")
    sub.add_argument("--omega")
    sub.add_argument("--c")
    sub.add_argument("--n-max", dest="n_max", help="highest harmonic level index")
    sub.add_argument("--rate", help="decay constant / inverse-temperature analog")
    sub.add_argument("--target-mean", dest="target_mean")
    sub.add_argument("--n-particles", dest="n_particles")
    sub.add_argument("--seed")
    sub.add_argument("--shards", help="fixed substream count (part of the result)")
    sub.add_argument("--workers", help="execution parallelism (never changes the result)")
    sub.add_argument("--tail-epsilon", dest="tail_epsilon")
    sub.add_argument("--tol")
    sub.add_argument("--persistence-l", dest="persistence_l")
    sub.add_argument("--kb", help="Boltzmann-constant value for the temperature conversion")
    sub.add_argument("--output-dir", dest="output_dir")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tempens", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common_flags(subs.add_parser(name))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = build_config(args)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except maxent.UnattainableTargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNATTAINABLE
    except (
        decay_sim.DegenerateSampleError,
        maxent.ConvergenceError,
        FloatingPointError,
        OverflowError,
        ZeroDivisionError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining ValueErrors are input validation: config-class failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
