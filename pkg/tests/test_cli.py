"""End-to-end command-line behavior: exit codes, report schema, output
determinism, config file handling."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tempens import cli

HALF_OFFSET_MEAN_AT_1 = 1.0819767068693265


def run(tmp_path, sub, *args, name="out"):
    out = tmp_path / name
    code = cli.main([sub, *args, "--output-dir", str(out)])
    return code, out


def load(out, fname):
    return json.loads((out / fname).read_text())


def write_two_level(tmp_path, kind="time", values=(0.0, 1.0)):
    path = tmp_path / "levels.txt"
    path.write_text(f"kind: {kind}\n" + "\n".join(repr(v) for v in values) + "\n")
    return path


def test_ensemble_end_to_end(tmp_path):
    code, out = run(tmp_path, "ensemble", "--d", "1", "--n-max", "40", "--rate", "1")
    assert code == 0
    payload = load(out, "ensemble.json")
    assert payload["schema"] == "tempens/1"
    assert payload["command"] == "ensemble"
    res = payload["results"]
    assert res["kind"] == "time"
    assert res["mean"] == pytest.approx(HALF_OFFSET_MEAN_AT_1, rel=1e-12)
    assert res["log_partition"] == pytest.approx(-0.041324854612918106, rel=1e-10)
    assert all(c["pass"] for c in payload["checks"])
    names = [c["name"] for c in payload["checks"]]
    assert "normalization_error" in names and "entropy_identity_error" in names
    csv_lines = (out / "weights.csv").read_text().splitlines()
    assert csv_lines[0] == "value,probability"
    assert len(csv_lines) == res["levels"] + 1
    # 17-significant-digit floats: the file round-trips exactly
    first_prob = float(csv_lines[1].split(",")[1])
    assert 0.0 < first_prob <= 1.0


def test_ensemble_echo_hides_execution_knobs(tmp_path):
    code, out = run(tmp_path, "ensemble", "--d", "1", "--n-max", "10", "--rate", "1", "--workers", "3")
    assert code == 0
    echo = load(out, "ensemble.json")["config_echo"]
    assert "output_dir" not in echo
    assert "workers" not in echo
    assert echo["rate"] == 1.0
    assert echo["shards"] == 8


def test_ensemble_requires_rate(tmp_path):
    code, _ = run(tmp_path, "ensemble", "--d", "1", "--n-max", "10")
    assert code == 2


def test_ensemble_temperature_conversion(tmp_path):
    spec = write_two_level(tmp_path, kind="energy")
    code, out = run(tmp_path, "ensemble", "--spectrum", str(spec), "--rate", "2", "--kb", "0.5")
    assert code == 0
    assert load(out, "ensemble.json")["results"]["temperature_equivalent"] == 4.0


def test_ensemble_persistence_extra(tmp_path):
    code, out = run(
        tmp_path, "ensemble", "--d", "1", "--n-max", "10", "--rate", "2", "--persistence-l", "4"
    )
    assert code == 0
    assert load(out, "ensemble.json")["results"]["persistence"] == 0.5


def test_negative_time_spectrum_warns(tmp_path, capsys):
    spec = write_two_level(tmp_path, values=(-1.0, 0.0, 1.0))
    code, _ = run(tmp_path, "ensemble", "--spectrum", str(spec), "--rate", "1")
    assert code == 0
    assert "negative" in capsys.readouterr().err


def test_solve_recovers_unit_rate(tmp_path):
    code, out = run(
        tmp_path, "solve", "--d", "1", "--n-max", "2000",
        "--target-mean", repr(HALF_OFFSET_MEAN_AT_1),
    )
    assert code == 0
    res = load(out, "solve.json")["results"]
    assert res["rate"] == pytest.approx(1.0, rel=1e-9)
    assert res["closed_form_rate"] == pytest.approx(1.0, rel=1e-12)
    assert abs(res["residual"]) <= 1e-10
    assert res["iterations"] <= 200


def test_solve_unattainable_target_exits_4(tmp_path):
    # means at or below d/2 need infinite rate
    code, _ = run(tmp_path, "solve", "--d", "1", "--n-max", "100", "--target-mean", "0.4")
    assert code == 4


def test_solve_without_target_exits_2(tmp_path):
    code, _ = run(tmp_path, "solve", "--d", "1", "--n-max", "100")
    assert code == 2


def test_rate_and_target_mean_are_exclusive(tmp_path):
    code, _ = run(
        tmp_path, "solve", "--d", "1", "--n-max", "100", "--rate", "1", "--target-mean", "1.0"
    )
    assert code == 2


def test_simulate_end_to_end(tmp_path):
    code, out = run(
        tmp_path, "simulate", "--d", "1", "--n-max", "30", "--rate", "1",
        "--n-particles", "20000", "--seed", "9",
    )
    assert code == 0
    res = load(out, "simulate.json")["results"]
    assert res["n_total"] == 20000
    assert sum(res["counts"]) == 20000
    fit = res["fit"]
    assert fit["status"] == "ok"
    assert abs(fit["lambda_hat"] - 1.0) < 4.0 * fit["stderr"]
    assert fit["chi2"] is None or fit["chi2"] >= 0.0
    lines = (out / "survival.csv").read_text().splitlines()
    assert lines[0] == "time,expected_survivors,observed_survivors"
    assert len(lines) == res["levels"] + 1
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(20000.0, rel=1e-3)
    assert float(first[2]) == 20000.0


def test_simulate_byte_identical_across_runs_and_workers(tmp_path):
    base = ["--d", "1", "--n-max", "25", "--rate", "1", "--n-particles", "5000", "--seed", "4"]
    _, a = run(tmp_path, "simulate", *base, name="a")
    _, b = run(tmp_path, "simulate", *base, name="b")
    _, c = run(tmp_path, "simulate", *base, "--workers", "3", name="c")
    for fname in ("simulate.json", "survival.csv"):
        ref = (a / fname).read_bytes()
        assert (b / fname).read_bytes() == ref
        assert (c / fname).read_bytes() == ref


def test_simulate_single_particle_is_degenerate(tmp_path):
    spec = write_two_level(tmp_path)
    code, out = run(
        tmp_path, "simulate", "--spectrum", str(spec), "--rate", "0.7",
        "--n-particles", "1", "--seed", "0",
    )
    assert code == 3
    payload = load(out, "simulate.json")  # report is still written
    assert payload["results"]["fit"]["status"] == "degenerate"


def test_simulate_requires_seed(tmp_path):
    code, _ = run(
        tmp_path, "simulate", "--d", "1", "--n-max", "10", "--rate", "1", "--n-particles", "10"
    )
    assert code == 2


def test_verify_all_checks_pass(tmp_path):
    code, out = run(
        tmp_path, "verify", "--d", "1", "--n-max", "7", "--rate", "2", "--seed", "0"
    )
    assert code == 0
    payload = load(out, "verify.json")
    assert all(c["pass"] for c in payload["checks"])
    names = {c["name"] for c in payload["checks"]}
    assert names == {
        "normalization_error",
        "entropy_identity_error",
        "commutator_max_norm",
        "conjugation_max_drift",
        "diag_consistency_error",
        "fd_ratio_times_rate_minus_1",
        "maxent_max_gain",
    }
    res = payload["results"]
    # the asserted reading is 1/rate; the direct reading is listed only
    assert res["reciprocal_rate_reading"] == 0.5
    assert res["direct_rate_reading"] == 2.0
    assert res["fd_ratio"] == pytest.approx(0.5, rel=1e-6)


def test_verify_rejects_large_spectra(tmp_path):
    code, _ = run(tmp_path, "verify", "--d", "1", "--n-max", "100", "--rate", "0.001")
    assert code == 2


def test_verify_rejects_degenerate_levels(tmp_path):
    path = tmp_path / "levels.txt"
    path.write_text("kind: time\n0.0 2\n1.0\n")
    code, _ = run(tmp_path, "verify", "--spectrum", str(path), "--rate", "1")
    assert code == 2


def test_verify_two_level_skips_maxent_probe(tmp_path):
    spec = write_two_level(tmp_path)
    code, out = run(tmp_path, "verify", "--spectrum", str(spec), "--rate", "1")
    assert code == 0
    payload = load(out, "verify.json")
    assert "maxent_note" in payload["results"]
    assert all(c["name"] != "maxent_max_gain" for c in payload["checks"])


def test_failing_check_maps_to_exit_5():
    payload = {}
    code = cli._finish(payload, [cli._check("probe", 1.0, 1e-6)])
    assert code == cli.EXIT_VERIFICATION == 5
    assert payload["checks"][0]["pass"] is False


def test_json_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"d": 1.0, "n_max": 10, "rate": 0.5}))
    code, out = run(tmp_path, "ensemble", "--config", str(cfg))
    assert code == 0
    assert load(out, "ensemble.json")["config_echo"]["rate"] == 0.5


def test_key_value_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# harmonic run\nd = 1.0\nn_max = 10   # levels\nrate = 0.5\n")
    code, out = run(tmp_path, "ensemble", "--config", str(cfg))
    assert code == 0
    assert load(out, "ensemble.json")["config_echo"]["rate"] == 0.5


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("d = 1.0\nn_max = 10\nrate = 0.5\n")
    code, out = run(tmp_path, "ensemble", "--config", str(cfg), "--rate", "2.0")
    assert code == 0
    assert load(out, "ensemble.json")["config_echo"]["rate"] == 2.0


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("d = 1.0\nn_max = 10\nrate = 0.5\nhalf_life = 3\n")
    code, _ = run(tmp_path, "ensemble", "--config", str(cfg))
    assert code == 2


def test_bad_config_value_exits_2(tmp_path):
    code, _ = run(tmp_path, "ensemble", "--d", "1", "--n-max", "ten", "--rate", "1")
    assert code == 2


def test_missing_spectrum_source_exits_2(tmp_path):
    code, _ = run(tmp_path, "ensemble", "--rate", "1")
    assert code == 2


def test_spectrum_file_and_harmonic_are_exclusive(tmp_path):
    spec = write_two_level(tmp_path)
    code, _ = run(
        tmp_path, "ensemble", "--spectrum", str(spec), "--d", "1", "--n-max", "5", "--rate", "1"
    )
    assert code == 2


def test_partial_physical_parameters_exit_2(tmp_path):
    code, _ = run(tmp_path, "ensemble", "--hbar", "1", "--mass", "1", "--rate", "1")
    assert code == 2


def test_physical_parameters_build_the_quantum(tmp_path):
    code, out = run(
        tmp_path, "ensemble", "--hbar", "1", "--mass", "1", "--omega", "1", "--c", "1",
        "--n-max", "10", "--rate", "1",
    )
    assert code == 0
    echo = load(out, "ensemble.json")["config_echo"]
    assert echo["hbar"] == 1.0 and echo["c"] == 1.0


def test_missing_spectrum_file_exits_2(tmp_path):
    code, _ = run(tmp_path, "ensemble", "--spectrum", str(tmp_path / "nope.txt"), "--rate", "1")
    assert code == 2


def test_console_entry_point(tmp_path):
    out = tmp_path / "cli"
    proc = subprocess.run(
        [
            sys.executable, "-m", "tempens", "ensemble",
            "--d", "1", "--n-max", "10", "--rate", "1", "--output-dir", str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (out / "ensemble.json").exists()
