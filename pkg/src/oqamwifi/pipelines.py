"""End-to-end transmitter and receiver chains for both schemes."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import coding, oqam, sync_est
from .channel import ChannelRealization
from .cp_ofdm import SampleStream, build_cp_preamble, cp_demodulate, cp_modulate
from .mapping import SymbolGrid, allocate_carriers, extract_data, qam_demap, qam_map
from .params import ConfigError, Scheme, SystemConfig, frame_geometry

# Receiver timing back-off (samples) applied after fine sync. For CP-OFDM it
# moves the FFT window into the cyclic prefix; the OQAM banks tolerate small
# offsets only through the one-tap equalizer, so no back-off is used there.
CP_BACKOFF = 4
OQAM_BACKOFF = 0
SEARCH_LAGS = 256


@dataclass(frozen=True)
class OqamAssets:
    """Everything the OQAM chains need that depends only on (K, gamma, N_TR)."""
    proto: oqam.PrototypeFilter
    weights: oqam.InterferenceWeights
    ce_values: np.ndarray
    preamble: SampleStream
    reference: np.ndarray
    reference_start: int

    @property
    def bank_offset(self) -> int:
        return self.preamble.markers["bank"]


@functools.lru_cache(maxsize=4)
def oqam_assets(K: int = 64, overlap: int = 4, n_tr: int = 6) -> OqamAssets:
    proto = oqam.design_prototype(K, overlap)
    weights = oqam.intrinsic_weights(proto, oqam.AUX_SPAN_K, oqam.AUX_SPAN_N)
    pre = oqam.build_oqam_preamble(proto, n_tr)
    # Fine-sync reference: last sync period plus the whole CE waveform. The
    # periodic part alone correlates almost as well one period off.
    ref_start = pre.markers["bank"] - K
    ref = pre.samples[ref_start:pre.markers["bank"] + proto.length].copy()
    return OqamAssets(proto, weights, oqam.ce_sequence(K, overlap), pre, ref, ref_start)


@dataclass
class TxFrame:
    payload_bits: np.ndarray
    stream: SampleStream
    grid: SymbolGrid
    cfg: SystemConfig

    @property
    def aux_overhead(self) -> float:
        return oqam.aux_energy_fraction(self.grid) if self.cfg.scheme is Scheme.OQAM_OFDM else 0.0


@dataclass
class RxResult:
    payload_bits: np.ndarray
    sync_ok: bool
    mu_hat: int
    delta_f_hat: float
    sync_peak: float
    channel: sync_est.ChannelEstimate | None = None
    phases: np.ndarray = field(default_factory=lambda: np.zeros(0))


def payload_to_bits(payload, cfg: SystemConfig) -> np.ndarray:
    if isinstance(payload, (bytes, bytearray)):
        bits = np.unpackbits(np.frombuffer(bytes(payload), dtype=np.uint8))
    else:
        bits = np.asarray(payload, dtype=np.uint8).ravel()
    if bits.size != cfg.payload_bits:
        raise ConfigError(f"payload has {bits.size} bits, configuration expects {cfg.payload_bits}")
    return bits


def _data_symbols(bits: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    code = coding.encode_frame(bits, cfg.n_symb, cfg.n_dbps, cfg.code_rate, cfg.bits_per_symbol)
    return qam_map(code, cfg.modulation_order)


def transmit(payload, cfg: SystemConfig) -> TxFrame:
    """Preamble followed by the coded, mapped and modulated payload.

    Markers: ``data`` (first data sample), ``occupied`` (span used for the
    SNR reference) and the scheme's preamble markers.
    """
    bits = payload_to_bits(payload, cfg)
    K = cfg.n_subcarriers
    grid = allocate_carriers(_data_symbols(bits, cfg), cfg.scheme, cfg.n_symb, K)
    if cfg.scheme is Scheme.CP_OFDM:
        pre = build_cp_preamble()
        body = cp_modulate(grid, cfg.cp_length)
        samples = np.concatenate([pre.samples, body.samples])
        markers = dict(pre.markers, data=len(pre), occupied=(0, samples.size))
        return TxFrame(bits, SampleStream(samples, markers), grid, cfg)
    assets = oqam_assets(K, cfg.overlap_factor, cfg.n_tr)
    full = oqam.insert_auxiliary_pilots(oqam.bank_grid(grid, K, cfg.overlap_factor), assets.weights)
    body = oqam.synthesis(full, assets.proto)
    sync_part = assets.preamble.samples[:assets.bank_offset]
    samples = np.concatenate([sync_part, body.samples])
    markers = dict(assets.preamble.markers,
                   data=assets.bank_offset + oqam.CE_SLOTS * K // 2,
                   occupied=(assets.preamble.markers["sync"], samples.size))
    data_grid = SymbolGrid(Scheme.OQAM_OFDM, full.values[:, oqam.CE_SLOTS:], grid.roles,
                           grid.pilot_mask, grid.aux_mask)
    return TxFrame(bits, SampleStream(samples, markers), data_grid, cfg)


def expected_length(cfg: SystemConfig) -> int:
    """Physical sample count of a transmitted frame."""
    geo = frame_geometry(cfg)
    if cfg.scheme is Scheme.CP_OFDM:
        return geo.total_samples
    K = cfg.n_subcarriers
    n_slots = oqam.CE_SLOTS + 2 * cfg.n_symb
    return oqam.sync_length(K, cfg.n_tr) + (n_slots - 1) * K // 2 + cfg.overlap_factor * K


def true_channel_response(ch: ChannelRealization, K: int = 64, timing_error: int = 0) -> np.ndarray:
    """Per-bin gain seen by a receiver whose window starts ``timing_error`` samples late."""
    taps = np.asarray(ch.taps)
    l = np.arange(taps.size) - timing_error
    k = np.arange(K)[:, None]
    return np.sum(taps[None, :] * np.exp(-2j * np.pi * k * l[None, :] / K), axis=1)


def _padded(samples: np.ndarray, need: int) -> np.ndarray:
    if samples.size >= need:
        return samples
    return np.concatenate([samples, np.zeros(need - samples.size, dtype=complex)])


def _decode(symbols: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    hard = qam_demap(symbols, cfg.modulation_order)
    return coding.decode_frame(hard, cfg.payload_bits, cfg.code_rate, cfg.bits_per_symbol)


def _synchronize(r: np.ndarray, cfg: SystemConfig, reference: np.ndarray, ref_start: int,
                 backoff: int, genie: ChannelRealization | None, genie_sync: bool):
    if genie_sync:
        if genie is None:
            raise ValueError("genie sync needs the channel realization")
        corrected = sync_est.apply_cfo_correction(r, genie.cfo, cfg.n_subcarriers)
        return corrected, genie.timing_offset, genie.cfo, 1.0, True
    lags = min(SEARCH_LAGS, max(r.size - (sync_est.sync_window(cfg)[1] + cfg.n_subcarriers * 2), 0))
    res = sync_est.coarse_sync(r, cfg, max_lag=lags)
    corrected = sync_est.apply_cfo_correction(r, res.delta_f_hat, cfg.n_subcarriers)
    K = cfg.n_subcarriers
    corrected = _padded(corrected, res.mu_hat + ref_start + K + reference.size)
    t = sync_est.fine_sync(corrected, reference, res.mu_hat + ref_start, K) - ref_start
    return corrected, max(t - backoff, 0), res.delta_f_hat, res.peak, res.ok


def receive(stream, cfg: SystemConfig, *, genie: ChannelRealization | None = None,
            genie_sync: bool = False, genie_csi: bool = False) -> RxResult:
    """Coarse sync, CFO correction, fine sync, channel estimation, ZF, tracking, decoding.

    A sync failure still produces a best-effort decode, but ``sync_ok`` is
    False and the harness counts the frame as lost.
    """
    r = stream.samples if isinstance(stream, SampleStream) else np.asarray(stream)
    if genie_csi and genie is None:
        raise ValueError("genie CSI needs the channel realization")
    K = cfg.n_subcarriers
    track = not (genie_sync and genie_csi)
    if cfg.scheme is Scheme.CP_OFDM:
        reference = build_cp_preamble().samples
        y, t0, dfh, peak, ok = _synchronize(r, cfg, reference, 0, CP_BACKOFF, genie, genie_sync)
        y = _padded(y, t0 + expected_length(cfg))
        if genie_csi:
            est = sync_est.ChannelEstimate(true_channel_response(genie, K, t0 - genie.timing_offset))
        else:
            est = sync_est.estimate_channel_cp(y, t0, K)
        grid = cp_demodulate(y, cfg.n_symb, K, cfg.cp_length, start=t0 + len(reference))
        eq = sync_est.zf_equalize(grid.values, est)
        phases = np.zeros(cfg.n_symb)
        if track:
            eq, phases = sync_est.track_phase_cp(eq, K, est)
        symbols = extract_data(eq, Scheme.CP_OFDM, K)
    else:
        assets = oqam_assets(K, cfg.overlap_factor, cfg.n_tr)
        y, t0, dfh, peak, ok = _synchronize(r, cfg, assets.reference, assets.reference_start,
                                                OQAM_BACKOFF, genie, genie_sync)
        y = _padded(y, t0 + expected_length(cfg))
        n_slots = oqam.CE_SLOTS + 2 * cfg.n_symb
        z = oqam.analysis_complex(y, assets.proto, n_slots, start=t0 + assets.bank_offset)
        if genie_csi:
            est = sync_est.ChannelEstimate(true_channel_response(genie, K, t0 - genie.timing_offset))
        else:
            est = sync_est.estimate_channel_oqam(z[:, 0], assets.ce_values, assets.weights)
        eq = sync_est.zf_equalize(z[:, oqam.CE_SLOTS:], est)
        phases = np.zeros(2 * cfg.n_symb)
        if track:
            eq, phases = sync_est.track_phase_oqam(eq, K, est)
        symbols = extract_data(eq.real, Scheme.OQAM_OFDM, K)
    bits = _decode(symbols, cfg)
    return RxResult(bits, bool(ok), int(t0), float(dfh), float(peak), est, phases)
