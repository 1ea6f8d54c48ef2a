import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oqamwifi.cp_ofdm import (LONG_TRAINING, SHORT_TRAINING, SampleStream, build_cp_preamble,
                              cp_demodulate, cp_modulate)
from oqamwifi.mapping import SymbolGrid
from oqamwifi.params import Scheme


def _grid(values):
    return SymbolGrid(Scheme.CP_OFDM, values)


def test_single_carrier_symbol():
    g = np.zeros((64, 1), dtype=complex)
    g[1, 0] = 1
    s = cp_modulate(_grid(g)).samples
    n = np.arange(64)
    assert np.allclose(s[16:], np.exp(2j * np.pi * n / 64) / 8, atol=1e-12)
    assert np.allclose(s[:16], s[-16:])


@settings(deadline=None)
@given(st.integers(1, 12), st.integers(0, 10_000))
def test_roundtrip(n_symb, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((64, n_symb)) + 1j * rng.standard_normal((64, n_symb))
    s = cp_modulate(_grid(g))
    assert len(s) == 80 * n_symb
    assert np.allclose(cp_demodulate(s, n_symb).values, g, atol=1e-10)


def test_full_frame_length():
    assert len(cp_modulate(_grid(np.zeros((64, 684), dtype=complex)))) == 54720


def test_parseval(rng):
    g = rng.standard_normal((64, 10)) + 1j * rng.standard_normal((64, 10))
    s = cp_modulate(_grid(g)).samples.reshape(10, 80)[:, 16:]
    assert np.sum(np.abs(s) ** 2) == pytest.approx(np.sum(np.abs(g) ** 2), rel=1e-9)


def test_shift_inside_cp_is_phase_ramp(rng):
    g = rng.standard_normal((64, 3)) + 1j * rng.standard_normal((64, 3))
    s = cp_modulate(_grid(g)).samples
    shifted = np.concatenate([[0], s])  # one-sample delay, read from the old start
    y = cp_demodulate(shifted, 3).values
    assert np.allclose(np.abs(y), np.abs(g), atol=1e-9)
    k = np.arange(64)
    assert np.allclose(y, g * np.exp(-2j * np.pi * k / 64)[:, None], atol=1e-9)


def test_zero_in_zero_out():
    assert not np.any(cp_demodulate(np.zeros(160), 2).values)


def test_demodulate_needs_samples():
    with pytest.raises(ValueError):
        cp_demodulate(np.zeros(100), 2)


def test_modulate_rejects_oqam_grid():
    with pytest.raises(ValueError):
        cp_modulate(SymbolGrid(Scheme.OQAM_OFDM, np.zeros((64, 2))))


def test_preamble_structure():
    pre = build_cp_preamble()
    s = pre.samples
    assert len(pre) == 320
    assert np.max(np.abs(s[:144] - s[16:160])) < 1e-12
    assert np.max(np.abs(s[192:256] - s[256:320])) < 1e-12
    assert np.max(np.abs(s[160:192] - s[288:320])) < 1e-12  # guard = cyclic extension
    assert np.count_nonzero(SHORT_TRAINING) == 12
    assert np.count_nonzero(LONG_TRAINING) == 52
    # both halves carry the same average power as a data symbol
    assert np.mean(np.abs(s[:160]) ** 2) == pytest.approx(52 / 64)
    assert np.mean(np.abs(s[192:]) ** 2) == pytest.approx(52 / 64)


def test_stream_power_helper():
    st_ = SampleStream(np.array([1, 1j, 0, 0]))
    assert st_.power() == 0.5
    assert st_.power(0, 2) == 1.0
