"""Spectrum construction, the equally spaced half-offset family, tail
truncation, and the text file format."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempens import (
    HarmonicParams,
    Spectrum,
    harmonic_time_spectrum,
    make_explicit_spectrum,
    read_spectrum_file,
    truncate_by_tail_mass,
    write_spectrum_file,
)


def test_explicit_spectrum_sorts_and_merges_duplicates():
    s = make_explicit_spectrum("time", [1.0, 0.0, 1.0], [2, 1, 3])
    np.testing.assert_array_equal(s.values, [0.0, 1.0])
    np.testing.assert_array_equal(s.degeneracies, [1, 5])
    assert s.count == 2


def test_explicit_spectrum_defaults_to_unit_degeneracy():
    s = make_explicit_spectrum("energy", [3.0, 1.0, 2.0])
    np.testing.assert_array_equal(s.values, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(s.degeneracies, [1, 1, 1])


def test_spectrum_arrays_are_read_only():
    s = make_explicit_spectrum("time", [0.0, 1.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0
    with pytest.raises(ValueError):
        s.degeneracies[0] = 2


@pytest.mark.parametrize(
    "kind,values,degs",
    [
        ("frequency", [0.0], None),          # unknown kind
        ("time", [], None),                  # empty
        ("time", [0.0, np.inf], None),       # non-finite
        ("time", [0.0, 1.0], [1]),           # length mismatch
        ("time", [0.0, 1.0], [1, 0]),        # zero degeneracy
        ("time", [0.0, 1.0], [1.5, 1.0]),    # fractional degeneracy
    ],
)
def test_bad_spectrum_inputs_rejected(kind, values, degs):
    with pytest.raises(ValueError):
        make_explicit_spectrum(kind, values, degs)


def test_direct_spectrum_rejects_unsorted_values():
    # the raw constructor demands strictly increasing values
    with pytest.raises(ValueError):
        Spectrum("time", np.array([1.0, 0.0]), np.array([1, 1]))


def test_negative_time_values_are_allowed():
    # shifted spectra are legal; consumers warn, construction does not
    s = make_explicit_spectrum("time", [-1.0, 0.0, 1.0])
    assert s.values[0] == -1.0


def test_harmonic_levels_are_half_offset_multiples():
    params = HarmonicParams.from_time_quantum(2.0)
    s = harmonic_time_spectrum(params, n_max=2)
    np.testing.assert_array_equal(s.values, [1.0, 3.0, 5.0])
    np.testing.assert_array_equal(s.degeneracies, [1, 1, 1])
    assert s.kind == "time"


def test_harmonic_quantum_from_physical_parameters():
    p = HarmonicParams(hbar=2.0, mass=3.0, omega=5.0, c=0.5)
    # 2^2 * 5 / (3^2 * 0.5^4)
    assert p.d == pytest.approx(35.55555555555556, rel=1e-15)


def test_from_time_quantum_round_trips():
    assert HarmonicParams.from_time_quantum(0.125).d == 0.125


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_harmonic_params_reject_nonpositive_inputs(bad):
    with pytest.raises(ValueError):
        HarmonicParams(hbar=1.0, mass=1.0, omega=bad, c=1.0)


def test_harmonic_rejects_negative_n_max():
    with pytest.raises(ValueError):
        harmonic_time_spectrum(HarmonicParams.from_time_quantum(1.0), n_max=-1)


def test_truncation_drops_far_tail_level():
    s = make_explicit_spectrum("time", [0.0, 1.0, 100.0])
    out = truncate_by_tail_mass(s, rate=1.0, epsilon=1e-20)
    np.testing.assert_array_equal(out.values, [0.0, 1.0])


def test_truncation_cut_point_unit_grid():
    # integers 0..50 at rate 1: relative tail at level j is ~e^{-j};
    # eps = 1e-6 first drops at j = 14 and the second pass is a fixpoint
    s = make_explicit_spectrum("time", np.arange(51.0))
    out = truncate_by_tail_mass(s, rate=1.0, epsilon=1e-6)
    assert out.count == 14
    np.testing.assert_array_equal(out.values, np.arange(14.0))


def test_truncation_no_op_returns_same_object():
    s = make_explicit_spectrum("time", [0.0, 1.0, 2.0])
    assert truncate_by_tail_mass(s, rate=1.0, epsilon=1e-30) is s


def test_truncation_keeps_at_least_two_levels():
    s = make_explicit_spectrum("time", [0.0, 1.0, 2.0, 3.0])
    out = truncate_by_tail_mass(s, rate=50.0, epsilon=0.5)
    assert out.count == 2


def test_truncation_preserves_degeneracies():
    s = make_explicit_spectrum("time", [0.0, 1.0, 40.0], [3, 2, 1])
    out = truncate_by_tail_mass(s, rate=1.0, epsilon=1e-12)
    np.testing.assert_array_equal(out.degeneracies, [3, 2])


@pytest.mark.parametrize("rate,eps", [(0.0, 0.5), (-1.0, 0.5), (1.0, 0.0), (1.0, 1.0), (1.0, 2.0)])
def test_truncation_parameter_validation(rate, eps):
    s = make_explicit_spectrum("time", [0.0, 1.0])
    with pytest.raises(ValueError):
        truncate_by_tail_mass(s, rate=rate, epsilon=eps)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=40),
    rate=st.floats(min_value=0.01, max_value=50.0),
    eps=st.floats(min_value=1e-300, max_value=0.9999),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_truncation_is_exactly_idempotent(n, rate, eps, seed):
    """Applying the truncation twice must change nothing, bit for bit."""
    rng = np.random.default_rng(seed)
    values = np.unique(rng.uniform(0.0, 10.0, size=n))
    s = make_explicit_spectrum("time", values)
    once = truncate_by_tail_mass(s, rate, eps)
    twice = truncate_by_tail_mass(once, rate, eps)
    assert twice is once
    np.testing.assert_array_equal(once.values, twice.values)


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=30),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_truncation_output_is_prefix_of_input(n, seed):
    rng = np.random.default_rng(seed)
    values = np.unique(rng.uniform(0.0, 5.0, size=n))
    s = make_explicit_spectrum("time", values)
    out = truncate_by_tail_mass(s, rate=2.0, epsilon=1e-8)
    assert min(2, s.count) <= out.count <= s.count
    np.testing.assert_array_equal(out.values, s.values[: out.count])


def test_spectrum_file_round_trip(tmp_path):
    s = make_explicit_spectrum("energy", [0.0, 0.5, 2.25], [1, 4, 2])
    path = tmp_path / "levels.txt"
    write_spectrum_file(path, s)
    back = read_spectrum_file(path)
    assert back.kind == s.kind
    np.testing.assert_array_equal(back.values, s.values)
    np.testing.assert_array_equal(back.degeneracies, s.degeneracies)


def test_spectrum_file_comments_and_blank_lines(tmp_path):
    path = tmp_path / "levels.txt"
    path.write_text(
        "# decay ladder\n"
        "kind: time   # header\n"
        "\n"
        "0.5\n"
        "1.5 3   # triple\n"
    )
    s = read_spectrum_file(path)
    assert s.kind == "time"
    np.testing.assert_array_equal(s.values, [0.5, 1.5])
    np.testing.assert_array_equal(s.degeneracies, [1, 3])


def test_spectrum_file_merges_repeated_values(tmp_path):
    path = tmp_path / "levels.txt"
    path.write_text("kind: time\n1.0\n1.0 2\n")
    s = read_spectrum_file(path)
    np.testing.assert_array_equal(s.values, [1.0])
    np.testing.assert_array_equal(s.degeneracies, [3])


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("0.5\n1.5\n", "kind"),                       # header missing
        ("kind: momentum\n0.5\n", "momentum"),        # unknown kind
        ("kind: time\nabc\n", "abc"),                 # bad value
        ("kind: time\n1.0 x\n", "x"),                 # bad degeneracy
        ("kind: time\n1.0 2 3\n", "value"),           # too many fields
        ("kind: time\n", "no levels"),                # empty payload
    ],
)
def test_spectrum_file_errors_name_the_problem(tmp_path, text, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ValueError, match=fragment):
        read_spectrum_file(path)


def test_spectrum_file_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("kind: time\n0.5\nnope\n")
    with pytest.raises(ValueError, match=":3:"):
        read_spectrum_file(path)
