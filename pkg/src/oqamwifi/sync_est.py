"""Synchronization, channel estimation, equalization and pilot phase tracking."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cp_ofdm import LONG_START, LONG_TRAINING, SampleStream
from .mapping import OQAM_PILOT_GROUPS
from .oqam import InterferenceWeights, pseudo_pilots
from .params import PILOT_CARRIERS, PILOT_VALUES, USED_CARRIERS, Scheme, SystemConfig

SYNC_THRESHOLD = 0.5
CE_EPS = 1e-6
_TIE_TOL = 1e-9


@dataclass
class SyncResult:
    mu_hat: int
    delta_f_hat: float
    peak: float
    metric_trace: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.peak >= SYNC_THRESHOLD


@dataclass
class ChannelEstimate:
    """Per-bin complex gains (zero on unused bins) and the unreliable-carrier mask."""
    H: np.ndarray
    unreliable: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.unreliable is None:
            self.unreliable = np.zeros(self.H.size, dtype=bool)

    def used(self, K: int | None = None) -> np.ndarray:
        K = self.H.size if K is None else K
        return self.H[np.mod(USED_CARRIERS, K)]


def _samples(stream) -> np.ndarray:
    return stream.samples if isinstance(stream, SampleStream) else np.asarray(stream)


def sync_window(cfg: SystemConfig) -> tuple[int, int, int]:
    """(first m, last m, lag distance) of the autocorrelation window."""
    K = cfg.n_subcarriers
    if cfg.scheme is Scheme.CP_OFDM:
        return 0, K - 1, K + cfg.cp_length
    return (cfg.overlap_factor - 2) * K - 1, (cfg.n_tr + 1) * K - 1, K


def coarse_sync(stream, cfg: SystemConfig, max_lag: int | None = None,
                keep_trace: bool = False) -> SyncResult:
    """Maximize the MLS metric 2|R[mu]|/Q[mu] over mu in [0, max_lag].

    R[mu] = sum_m conj(r[mu+m]) r[mu+m+dm] and Q[mu] the energy of both
    segments, m running over the scheme's window. Ties (the plateau of an
    exactly periodic preamble) go to the earliest lag.
    """
    r = _samples(stream)
    lo, hi, dm = sync_window(cfg)
    K = cfg.n_subcarriers
    span = hi + dm + 1
    avail = r.size - span
    if avail < 0:
        raise ValueError(f"stream of {r.size} samples shorter than the {span}-sample sync window")
    max_lag = avail if max_lag is None else min(max_lag, avail)
    seg = r[:max_lag + span]
    prod = np.conj(seg[:-dm]) * seg[dm:]
    energy = np.abs(seg[:-dm]) ** 2 + np.abs(seg[dm:]) ** 2
    cp = np.concatenate([[0], np.cumsum(prod)])
    ce = np.concatenate([[0], np.cumsum(energy)])
    mu = np.arange(max_lag + 1)
    R = cp[mu + hi + 1] - cp[mu + lo]
    Q = ce[mu + hi + 1] - ce[mu + lo]
    metric = np.where(Q > 0, 2 * np.abs(R) / np.where(Q > 0, Q, 1), 0.0)
    peak = float(metric.max())
    best = int(np.flatnonzero(metric >= peak - _TIE_TOL)[0])
    dfh = float(np.angle(R[best]) / (2 * np.pi) * K / dm)
    return SyncResult(best, dfh, peak, metric if keep_trace else None)


def write_metric_trace(result: SyncResult, path) -> Path:
    if result.metric_trace is None:
        raise ValueError("sync result was computed without keep_trace=True")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lag", "metric"])
        for lag, val in enumerate(result.metric_trace):
            w.writerow([lag, repr(float(val))])
    return path


def apply_cfo_correction(stream, delta_f_hat: float, K: int = 64):
    """Counter-rotate by exp(-j 2 pi df n / K), n = absolute sample index."""
    r = _samples(stream)
    out = r * np.exp(-2j * np.pi * delta_f_hat * np.arange(r.size) / K) if delta_f_hat else r.copy()
    if isinstance(stream, SampleStream):
        return SampleStream(out, dict(stream.markers))
    return out


def fine_sync(corrected, known_preamble, mu_coarse: int, search_radius: int = 64) -> int:
    """argmax |cross-correlation with the known preamble| within +-radius of mu_coarse."""
    r = _samples(corrected)
    ref = _samples(known_preamble)
    lo = max(mu_coarse - search_radius, 0)
    hi = mu_coarse + search_radius
    if hi + ref.size > r.size:
        raise ValueError("fine-sync search runs past the end of the stream")
    win = np.lib.stride_tricks.sliding_window_view(r[lo:hi + ref.size], ref.size)
    corr = np.abs(win @ np.conj(ref))
    return lo + int(np.argmax(corr))


def estimate_channel_cp(samples, start: int, K: int = 64) -> ChannelEstimate:
    """Average of Y/L over the two long training symbols starting at ``start``."""
    r = _samples(samples)
    t = start + LONG_START
    Y = np.fft.fft(r[t:t + 2 * K].reshape(2, K), axis=1, norm="ortho").mean(axis=0)
    used = np.mod(USED_CARRIERS, K)
    H = np.zeros(K, dtype=complex)
    H[used] = Y[used] / LONG_TRAINING[used]
    return ChannelEstimate(H)


def estimate_channel_oqam(ce_output: np.ndarray, ce_values: np.ndarray,
                          weights: InterferenceWeights, slot: int = 0) -> ChannelEstimate:
    """H = y / c with c the pseudo-pilot of the CE symbol."""
    K = ce_values.size
    c = pseudo_pilots(ce_values, weights, slot)
    used = np.mod(USED_CARRIERS, K)
    H = np.zeros(K, dtype=complex)
    bad = np.zeros(K, dtype=bool)
    ok = np.abs(c[used]) >= CE_EPS
    H[used[ok]] = ce_output[used[ok]] / c[used[ok]]
    H[used[~ok]] = 1.0
    bad[used[~ok]] = True
    return ChannelEstimate(H, bad)


def estimate_channel(scheme, observation, *, ce_values=None, weights=None, start: int = 0,
                     K: int = 64) -> ChannelEstimate:
    """Dispatch: CP takes the stream and preamble start; OQAM the CE-slot analysis output."""
    if Scheme.parse(scheme) is Scheme.CP_OFDM:
        return estimate_channel_cp(observation, start, K)
    if ce_values is None or weights is None:
        raise ValueError("OQAM channel estimation needs the CE values and weight table")
    return estimate_channel_oqam(np.asarray(observation), ce_values, weights)


def zf_equalize(values: np.ndarray, est: ChannelEstimate) -> np.ndarray:
    """Per-carrier division on used bins; unreliable and unused bins pass through."""
    out = np.array(values, dtype=complex)
    K = out.shape[0]
    used = np.mod(USED_CARRIERS, K)
    good = used[~est.unreliable[used] & (est.H[used] != 0)]
    out[good] = out[good] / est.H[good][:, None]
    return out


def _hold_phases(phases: np.ndarray, valid: np.ndarray) -> np.ndarray:
    out = phases.copy()
    last = 0.0
    for i in range(out.size):
        if valid[i]:
            last = out[i]
        else:
            out[i] = last
    return out


def _pilot_weights(H, K: int) -> np.ndarray:
    """|H|^2 per pilot: after ZF a faded pilot is mostly amplified noise."""
    bins = np.mod(PILOT_CARRIERS, K)
    if H is None:
        return np.ones(bins.size)
    H = H.H if isinstance(H, ChannelEstimate) else np.asarray(H)
    return np.abs(H[bins]) ** 2


def track_phase_cp(values: np.ndarray, K: int = 64, H=None) -> tuple[np.ndarray, np.ndarray]:
    """Common phase error per symbol from the four pilots; returns (grid, phases).

    phi_n = angle(sum_p |H_p|^2 Y_pn X_p*) on the equalized grid, i.e. the
    pilot sum taken before equalization. Without ``H`` all pilots count equally.
    """
    bins = np.mod(PILOT_CARRIERS, K)
    w = _pilot_weights(H, K) * PILOT_VALUES
    acc = np.sum(values[bins] * w[:, None], axis=0)
    phases = _hold_phases(np.angle(acc), np.abs(acc) > 0)
    return values * np.exp(-1j * phases)[None, :], phases


def _oqam_pilot_sums(values: np.ndarray, K: int, H) -> np.ndarray:
    """Weighted pilot correlation per complex symbol (two pilots each)."""
    w = _pilot_weights(H, K) * PILOT_VALUES
    n_sym = values.shape[1] // 2
    acc = np.zeros(n_sym, dtype=complex)
    for i in range(n_sym):
        idx = OQAM_PILOT_GROUPS[i % 2]
        acc[i] = np.sum(values[np.mod(PILOT_CARRIERS[idx], K), 2 * i] * w[idx])
    return acc


def track_phase_oqam(values: np.ndarray, K: int = 64, H=None,
                     mode: str = "linear") -> tuple[np.ndarray, np.ndarray]:
    """Pilot-based phase correction for OQAM, returned per half-slot.

    ``values`` is the complex analysis output of the data slots (after ZF).
    With only two pilots per complex symbol the per-symbol phase is noisy,
    so the default ``mode="linear"`` fits the ramp a constant residual CFO
    produces on a static channel: the slope from lag-2 products (same pilot
    carriers), then the offset from the de-ramped sum. ``mode="interp"``
    keeps the per-symbol estimates and interpolates between them.
    Returns the de-rotated grid and the per-slot phase.
    """
    n_slots = values.shape[1]
    acc = _oqam_pilot_sums(values, K, H)
    n_sym = acc.size
    slots = np.arange(n_slots)
    if mode == "interp":
        phases = np.unwrap(_hold_phases(np.angle(acc), np.abs(acc) > 0))
        slot_phase = _interp_linear(2 * np.arange(n_sym), phases, slots)
    elif mode == "linear":
        slope = float(np.angle(np.sum(acc[2:] * np.conj(acc[:-2])))) / 2 if n_sym > 2 else 0.0
        offset = float(np.angle(np.sum(acc * np.exp(-1j * slope * np.arange(n_sym)))))
        slot_phase = offset + slope * slots / 2
    else:
        raise ValueError(f"unknown tracking mode {mode!r}")
    return values * np.exp(-1j * slot_phase)[None, :], slot_phase


def _interp_linear(x, y, xq):
    """Piecewise-linear interpolation with linear extrapolation at both ends."""
    if x.size == 1:
        return np.full(xq.size, y[0])
    out = np.interp(xq, x, y)
    left, right = xq < x[0], xq > x[-1]
    out[left] = y[0] + (xq[left] - x[0]) * (y[1] - y[0]) / (x[1] - x[0])
    out[right] = y[-1] + (xq[right] - x[-1]) * (y[-1] - y[-2]) / (x[-1] - x[-2])
    return out


def track_phase(scheme, values: np.ndarray, K: int = 64, H=None) -> tuple[np.ndarray, np.ndarray]:
    if Scheme.parse(scheme) is Scheme.CP_OFDM:
        return track_phase_cp(values, K, H)
    return track_phase_oqam(values, K, H)
