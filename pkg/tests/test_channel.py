import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oqamwifi import channel
from oqamwifi.cp_ofdm import SampleStream


def test_rms_delay_spread_examples():
    assert channel.rms_delay_spread([1.0]) == 0
    assert channel.rms_delay_spread([1, 0, 1]) == pytest.approx(50e-9)
    assert channel.rms_delay_spread(channel.calibrated_pdp()) == pytest.approx(50e-9, abs=1e-9)
    with pytest.raises(ValueError):
        channel.rms_delay_spread([])


def test_ensemble_statistics():
    rng = np.random.default_rng(7)
    taps = np.array([channel.draw_channel(rng).taps for _ in range(10_000)])
    assert channel.ensemble_rms_delay_spread(taps) == pytest.approx(50e-9, abs=3e-9)
    assert np.mean(np.sum(np.abs(taps) ** 2, axis=1)) == pytest.approx(1, abs=0.02)


def test_cfo_range_respected(rng):
    for _ in range(200):
        ch = channel.draw_channel(rng, cfo_range=(-0.1, 0.1), timing_window=(3, 9))
        assert -0.1 <= ch.cfo <= 0.1 and 3 <= ch.timing_offset <= 9
    assert channel.draw_channel(rng, cfo_range=(0, 0)).cfo == 0


def test_identity_profile(rng):
    x = SampleStream(rng.standard_normal(50) + 1j * rng.standard_normal(50))
    ch = channel.draw_channel(rng, "identity", cfo_range=(-0.1, 0.1), snr_db=0)
    assert np.array_equal(channel.apply_channel(x, ch, rng).samples, x.samples)


def test_unknown_profile(rng):
    with pytest.raises(ValueError):
        channel.draw_channel(rng, "model_b")


def test_pure_cfo_keeps_magnitude(rng):
    x = SampleStream(rng.standard_normal(300) + 1j * rng.standard_normal(300))
    ch = channel.ChannelRealization(np.ones(1, dtype=complex), cfo=0.1)
    y = channel.apply_channel(x, ch).samples
    assert np.allclose(np.abs(y), np.abs(x.samples))
    assert np.angle(y[64] / x.samples[64]) == pytest.approx(2 * np.pi * 0.1)


@settings(deadline=None)
@given(st.integers(1, 200), st.integers(1, 10), st.integers(0, 20))
def test_output_length(n, taps, delay):
    ch = channel.ChannelRealization(np.ones(taps, dtype=complex), timing_offset=delay)
    y = channel.apply_channel(SampleStream(np.ones(n, dtype=complex)), ch)
    assert len(y) == delay + n + taps - 1


def test_noise_power_at_0db(rng):
    x = SampleStream(np.exp(2j * np.pi * rng.random(100_000)))
    ch = channel.ChannelRealization(np.ones(1, dtype=complex), snr_db=0.0)
    noise = channel.apply_channel(x, ch, rng).samples - x.samples
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(1, rel=0.05)


def test_noise_is_circular(rng):
    n = channel.complex_noise(rng, 1_000_000, 2.0)
    assert np.var(n.real) == pytest.approx(np.var(n.imag), rel=0.02)
    assert abs(np.corrcoef(n.real, n.imag)[0, 1]) < 0.02
    assert np.mean(np.abs(n) ** 2) == pytest.approx(2.0, rel=0.01)


def test_noise_reference_is_occupied_span(rng):
    sig = np.concatenate([np.zeros(1000), np.ones(1000)]).astype(complex)
    x = SampleStream(sig, {"occupied": (1000, 2000)})
    ch = channel.ChannelRealization(np.ones(1, dtype=complex), snr_db=10.0)
    noise = channel.apply_channel(x, ch, rng).samples - sig
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.1, rel=0.1)


def test_noise_needs_generator():
    with pytest.raises(ValueError):
        channel.apply_channel(SampleStream(np.ones(4, dtype=complex)),
                              channel.ChannelRealization(np.ones(1, dtype=complex), snr_db=3))


def test_realization_flags():
    assert channel.ChannelRealization.identity().noiseless
    assert not channel.ChannelRealization(np.ones(1), snr_db=10).noiseless
    assert math.isinf(channel.ChannelRealization(np.ones(1)).snr_db)
