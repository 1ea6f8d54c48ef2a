"""Multipath, CFO, timing-offset and AWGN impairments."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .cp_ofdm import SampleStream

SAMPLE_PERIOD = 50e-9
TARGET_RMS_DELAY = 50e-9
N_TAPS = 8
PROFILES = ("hiperlan_a", "awgn", "identity")


def rms_delay_spread(pdp, sample_period: float = SAMPLE_PERIOD) -> float:
    """Second central moment of a power-delay profile on a uniform delay grid."""
    pdp = np.asarray(pdp, dtype=float).ravel()
    if pdp.size == 0 or pdp.sum() <= 0:
        raise ValueError("empty power-delay profile")
    tau = np.arange(pdp.size) * sample_period
    w = pdp / pdp.sum()
    mean = np.sum(w * tau)
    return float(np.sqrt(max(np.sum(w * tau ** 2) - mean ** 2, 0.0)))


def exponential_pdp(decay_samples: float, n_taps: int = N_TAPS) -> np.ndarray:
    """Unit-sum exponential profile exp(-l/decay) on taps l = 0..n_taps-1."""
    pdp = np.exp(-np.arange(n_taps) / decay_samples)
    return pdp / pdp.sum()


@functools.lru_cache(maxsize=None)
def calibrated_pdp(target: float = TARGET_RMS_DELAY, n_taps: int = N_TAPS,
                   sample_period: float = SAMPLE_PERIOD) -> np.ndarray:
    """Exponential PDP whose rms delay spread equals ``target``."""
    def err(decay):
        return rms_delay_spread(exponential_pdp(decay, n_taps), sample_period) - target
    decay = brentq(err, 1e-3, 50.0, xtol=1e-12)
    pdp = exponential_pdp(decay, n_taps)
    pdp.setflags(write=False)
    return pdp


def ensemble_rms_delay_spread(taps, sample_period: float = SAMPLE_PERIOD) -> float:
    """rms delay spread of the average power profile of many realizations (rows)."""
    taps = np.atleast_2d(np.asarray(taps))
    return rms_delay_spread(np.mean(np.abs(taps) ** 2, axis=0), sample_period)


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray
    cfo: float = 0.0
    timing_offset: int = 0
    snr_db: float = math.inf

    @property
    def noiseless(self) -> bool:
        return not math.isfinite(self.snr_db)

    @classmethod
    def identity(cls) -> "ChannelRealization":
        return cls(np.ones(1, dtype=complex))


def draw_channel(rng: np.random.Generator, profile: str = "hiperlan_a", *,
                 cfo_range=(-0.1, 0.1), timing_window=(0, 0),
                 snr_db: float = math.inf) -> ChannelRealization:
    """Draw one static realization.

    ``identity`` ignores CFO, timing and noise settings entirely; ``awgn``
    keeps a single unit tap but applies CFO, timing offset and noise.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown channel profile {profile!r}")
    if profile == "identity":
        return ChannelRealization.identity()
    if profile == "hiperlan_a":
        pdp = calibrated_pdp()
        g = rng.standard_normal((2, pdp.size))
        taps = (g[0] + 1j * g[1]) * np.sqrt(pdp / 2)
    else:
        taps = np.ones(1, dtype=complex)
    lo, hi = cfo_range
    cfo = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    t_lo, t_hi = timing_window
    offset = int(rng.integers(t_lo, t_hi + 1)) if t_hi > t_lo else int(t_lo)
    return ChannelRealization(taps, cfo, offset, float(snr_db))


def complex_noise(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    g = rng.standard_normal((2, n))
    return (g[0] + 1j * g[1]) * np.sqrt(variance / 2)


def apply_channel(stream: SampleStream, ch: ChannelRealization, rng: np.random.Generator | None = None,
                  K: int = 64) -> SampleStream:
    """Delay, convolve, rotate by the CFO and add noise.

    Noise variance is the transmitted power over the occupied span
    (``markers['occupied']`` if present, else the whole stream) divided by
    the linear SNR. The CFO phase runs on the absolute output sample index.
    """
    x = stream.samples
    y = np.concatenate([np.zeros(ch.timing_offset, dtype=complex), np.convolve(x, ch.taps)])
    if ch.cfo:
        y = y * np.exp(2j * np.pi * ch.cfo * np.arange(y.size) / K)
    if not ch.noiseless:
        if rng is None:
            raise ValueError("a generator is needed to add noise")
        start, stop = stream.markers.get("occupied", (0, x.size))
        power = float(np.mean(np.abs(x[start:stop]) ** 2))
        y = y + complex_noise(rng, y.size, power / 10 ** (ch.snr_db / 10))
    markers = {name: (val + ch.timing_offset if isinstance(val, int) else val)
               for name, val in stream.markers.items()}
    return SampleStream(y, markers)
