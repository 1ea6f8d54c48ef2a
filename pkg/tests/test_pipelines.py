import numpy as np
import pytest

from oqamwifi import channel, oqam, pipelines
from oqamwifi.params import ConfigError, SystemConfig, USED_CARRIERS

USED = np.mod(USED_CARRIERS, 64)


def _random_payload(cfg, seed=0):
    return np.random.default_rng(seed).integers(0, 2, cfg.payload_bits, dtype=np.uint8)


def test_full_size_frame_lengths():
    cp = pipelines.transmit(_random_payload(SystemConfig(scheme="cp")), SystemConfig(scheme="cp"))
    assert len(cp.stream) == 320 + 54720
    cfg = SystemConfig(scheme="oqam")
    oq = pipelines.transmit(_random_payload(cfg), cfg)
    # 512-sample preamble budget, 43776 data samples and the 416-sample filter transient
    assert len(oq.stream) == 512 + 43776 + 416
    assert len(oq.stream) == pipelines.expected_length(cfg)


@pytest.mark.parametrize("scheme", ["cp", "oqam"])
@pytest.mark.parametrize("M", [4, 16, 64])
def test_identity_channel_round_trip(scheme, M):
    cfg = SystemConfig(scheme=scheme, modulation_order=M, payload_bytes=300)
    bits = _random_payload(cfg, M)
    tx = pipelines.transmit(bits, cfg)
    rx = pipelines.receive(channel.apply_channel(tx.stream, channel.ChannelRealization.identity()), cfg)
    assert rx.sync_ok and rx.mu_hat == 0
    assert np.array_equal(rx.payload_bits, bits)


def test_payload_bytes_accepted():
    cfg = SystemConfig(scheme="cp", payload_bytes=4)
    rx = pipelines.receive(pipelines.transmit(b"\x00\xffab", cfg).stream, cfg)
    assert np.packbits(rx.payload_bits).tobytes() == b"\x00\xffab"


def test_payload_size_mismatch():
    with pytest.raises(ConfigError):
        pipelines.transmit(np.zeros(10, dtype=np.uint8), SystemConfig(payload_bytes=100))


# CP estimates are exact; OQAM carries the data leakage into the CE slot,
# which stays below -35 dB (about 0.018 rad of phase).
@pytest.mark.parametrize("scheme,tol", [("cp", 1e-9), ("oqam", 10 ** (-35 / 20))])
def test_flat_phase_channel(scheme, tol):
    cfg = SystemConfig(scheme=scheme, payload_bytes=200)
    bits = _random_payload(cfg, 7)
    ch = channel.ChannelRealization(np.array([np.exp(1j * np.pi / 4)]))
    rx = pipelines.receive(channel.apply_channel(pipelines.transmit(bits, cfg).stream, ch), cfg)
    assert np.allclose(np.angle(rx.channel.H[USED]), np.pi / 4, atol=tol)
    assert np.array_equal(rx.payload_bits, bits)


@pytest.mark.parametrize("scheme", ["cp", "oqam"])
def test_cfo_noiseless(scheme):
    cfg = SystemConfig(scheme=scheme, payload_bytes=500)
    bits = _random_payload(cfg, 8)
    ch = channel.ChannelRealization(np.ones(1, dtype=complex), cfo=0.1, timing_offset=17)
    rx = pipelines.receive(channel.apply_channel(pipelines.transmit(bits, cfg).stream, ch), cfg)
    assert rx.delta_f_hat == pytest.approx(0.1, abs=1e-6)
    assert np.array_equal(rx.payload_bits, bits)


@pytest.mark.parametrize("scheme", ["cp", "oqam"])
def test_receive_is_deterministic(scheme):
    cfg = SystemConfig(scheme=scheme, payload_bytes=200)
    bits = _random_payload(cfg, 9)
    ch = channel.draw_channel(np.random.default_rng(4), timing_window=(0, 64), snr_db=12)
    outs = []
    for _ in range(2):
        stream = channel.apply_channel(pipelines.transmit(bits, cfg).stream, ch, np.random.default_rng(1))
        rx = pipelines.receive(stream, cfg)
        outs.append((rx.payload_bits.tobytes(), rx.mu_hat, rx.delta_f_hat, rx.phases.tobytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("scheme", ["cp", "oqam"])
def test_genie_receiver_on_multipath(scheme):
    cfg = SystemConfig(scheme=scheme, payload_bytes=200)
    bits = _random_payload(cfg, 10)
    ch = channel.draw_channel(np.random.default_rng(2), timing_window=(0, 30))
    stream = channel.apply_channel(pipelines.transmit(bits, cfg).stream, ch)
    rx = pipelines.receive(stream, cfg, genie=ch, genie_sync=True, genie_csi=True)
    assert rx.mu_hat == ch.timing_offset
    assert np.array_equal(rx.payload_bits, bits)
    with pytest.raises(ValueError):
        pipelines.receive(stream, cfg, genie_csi=True)


def test_sync_failure_on_noise_is_reported():
    cfg = SystemConfig(scheme="cp", payload_bytes=100)
    noise = np.random.default_rng(0).standard_normal(pipelines.expected_length(cfg) + 300) * (1 + 0j)
    rx = pipelines.receive(noise, cfg)
    assert rx.payload_bits.size == cfg.payload_bits
    assert not rx.sync_ok


def test_true_channel_response():
    ch = channel.ChannelRealization(np.array([1.0, 0.5j]))
    assert np.allclose(pipelines.true_channel_response(ch), np.fft.fft([1.0, 0.5j], 64))
    shifted = pipelines.true_channel_response(ch, timing_error=1)
    k = np.arange(64)
    assert np.allclose(shifted, np.fft.fft([1.0, 0.5j], 64) * np.exp(2j * np.pi * k / 64))


def test_oqam_aux_overhead_is_reported():
    cfg = SystemConfig(scheme="oqam", payload_bytes=200)
    tx = pipelines.transmit(_random_payload(cfg), cfg)
    assert 0 < tx.aux_overhead < 0.2
    assert pipelines.transmit(_random_payload(cfg.with_(scheme="cp")), cfg.with_(scheme="cp")).aux_overhead == 0
    assert tx.stream.markers["data"] == pipelines.oqam_assets().bank_offset + oqam.CE_SLOTS * 32
