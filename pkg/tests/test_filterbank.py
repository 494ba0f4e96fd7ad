import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from waveseg.errors import ConfigError, UnknownFilterError
from waveseg.filterbank import (
    EXACT_TOLERANCE,
    TABLE_TOLERANCE,
    analysis_1d,
    builtin_filter_pair,
    check_perfect_reconstruction,
    derive_highpass,
    fit_gain_delay,
    load_filter_pair,
    make_filter_pair,
    resolve_filter,
    synthesis_1d,
)


def test_o1_coefficients_verbatim():
    p = builtin_filter_pair("o1")
    assert p.h0.tolist() == [0.2304, 0.7148, 0.6309, -0.0280, -0.1870, 0.0308, -0.0329, -0.0106]


def test_bio2_synthesis_verbatim():
    p = builtin_filter_pair("bio2")
    assert p.f0.tolist() == [0.1513, -0.3980, 0.2022, 1.5032, 0.2022, -0.3980, 0.1513]


def test_bio1_lowpass_sum_near_root_two():
    assert abs(builtin_filter_pair("bio1").h0.sum() - 1.4143) < 1e-3
    assert abs(builtin_filter_pair("bio1").h0.sum() - np.sqrt(2)) < 1e-3


def test_signfix_differs_only_in_seventh_tap():
    a = builtin_filter_pair("o1").h0
    b = builtin_filter_pair("o1_signfix").h0
    assert np.flatnonzero(a != b).tolist() == [6]
    assert b[6] == 0.0329


def test_unknown_name():
    with pytest.raises(UnknownFilterError):
        builtin_filter_pair("haar9")
    # also a KeyError for dictionary-style callers
    with pytest.raises(KeyError):
        builtin_filter_pair("haar9")


@pytest.mark.parametrize("name", ["o1", "o1_signfix", "bio1", "bio2", "canonical"])
def test_highpass_sums_to_zero(pairs, name):
    p = pairs[name]
    assert abs(p.h1.sum()) < TABLE_TOLERANCE
    assert len(p.h1) == len(p.f0)
    assert len(p.f1) == len(p.h0)


def test_derive_highpass_deterministic(pairs):
    p = pairs["bio2"]
    a = derive_highpass(p.h0, p.f0)
    b = derive_highpass(p.h0, p.f0)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_orthogonal_highpass_is_alternating_flip():
    p = builtin_filter_pair("canonical")
    n = np.arange(len(p.h0))
    flip = (-1.0) ** n * p.h0[::-1]
    assert np.allclose(p.h1, flip)


def test_builtin_is_pure():
    a, b = builtin_filter_pair("bio1"), builtin_filter_pair("bio1")
    assert np.array_equal(a.h0, b.h0) and np.array_equal(a.f1, b.f1)
    assert not a.h0.flags.writeable


def test_canonical_exact():
    r = check_perfect_reconstruction(builtin_filter_pair("canonical"), 64, EXACT_TOLERANCE)
    assert r.passed
    assert r.max_error <= 1e-10
    assert abs(r.gain - 1.0) < 1e-12


@pytest.mark.parametrize("name,measured", [("bio1", 8.7e-5), ("bio2", 4.5e-4), ("o1_signfix", 1.2e-4)])
def test_table_pairs_pass(name, measured):
    r = check_perfect_reconstruction(builtin_filter_pair(name), 64)
    assert r.passed
    # values observed when the suite was written
    assert r.max_error == pytest.approx(measured, rel=0.1)


def test_printed_o1_reported_as_failing():
    r = builtin_filter_pair("o1").validation
    assert not r.passed
    assert r.max_error > 0.05


def test_zero_synthesis_fails():
    p = make_filter_pair("dead", [0.7071, 0.7071], [0.0, 0.0])
    assert not p.validation.passed


def test_signal_length_checked(pairs):
    with pytest.raises(ConfigError):
        check_perfect_reconstruction(pairs["bio1"], 15)
    with pytest.raises(ConfigError):
        check_perfect_reconstruction(pairs["bio1"], 10)


def test_make_filter_pair_rejects_bad_taps():
    with pytest.raises(ConfigError):
        make_filter_pair("x", [1.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        make_filter_pair("x", [1.0, np.nan], [1.0, 1.0])


def test_round_trip_is_delay_free(pairs, rng):
    x = rng.standard_normal(32)
    for name in ("canonical", "bio1", "bio2"):
        y = synthesis_1d(*analysis_1d(x, pairs[name]), pairs[name])
        g, d, err = fit_gain_delay(x, y)
        assert d == 0
        assert err < 5e-3


def test_haar_reconstructs_exactly():
    s = np.sqrt(0.5)
    p = make_filter_pair("haar", [s, s], [s, s], tolerance=1e-12)
    assert p.validation.passed


def test_json_round_trip(tmp_path, pairs):
    path = tmp_path / "bank.json"
    path.write_text(json.dumps(pairs["bio2"].to_json()))
    q = load_filter_pair(path)
    assert np.array_equal(q.h0, pairs["bio2"].h0)
    assert resolve_filter(str(path)).name == "bio2"


def test_json_bad_file(tmp_path):
    path = tmp_path / "bank.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_filter_pair(path)
    with pytest.raises(ConfigError):
        load_filter_pair(tmp_path / "missing.json")


@given(st.integers(-20, 20), st.floats(0.1, 10))
def test_fit_gain_delay_recovers_shift(shift, gain):
    x = np.random.default_rng(7).standard_normal(48)
    g, d, err = fit_gain_delay(x, gain * np.roll(x, shift))
    wrapped = (shift + 24) % 48 - 24
    assert d == wrapped
    assert g == pytest.approx(gain)
    assert err < 1e-9
