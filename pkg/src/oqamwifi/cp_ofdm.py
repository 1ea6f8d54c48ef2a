"""CP-OFDM modulator/demodulator and the 802.11a training preamble."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mapping import SymbolGrid
from .params import Scheme

_S = np.sqrt(13 / 6) * np.array([
    0, 0, 1 + 1j, 0, 0, 0, -1 - 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, -1 - 1j, 0, 0, 0,
    -1 - 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, 0, 0, 0, 0, -1 - 1j, 0, 0, 0, -1 - 1j, 0,
    0, 0, 1 + 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, 1 + 1j, 0, 0])
_L = np.array([
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1,
    1, 1, 1, 1, 0, 1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1,
    -1, 1, -1, 1, -1, 1, 1, 1, 1], dtype=complex)


def _to_bins(values_m26_26: np.ndarray, K: int = 64) -> np.ndarray:
    out = np.zeros(K, dtype=complex)
    out[np.mod(np.arange(-26, 27), K)] = values_m26_26
    return out


SHORT_TRAINING = _to_bins(_S)
LONG_TRAINING = _to_bins(_L)

SHORT_PERIOD = 16
N_SHORT = 10
LONG_GI = 32
LONG_START = N_SHORT * SHORT_PERIOD + LONG_GI  # 192


@dataclass
class SampleStream:
    """Complex baseband samples at rate 1/T_S with named sample offsets."""
    samples: np.ndarray
    markers: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.samples.size

    def power(self, start: int | None = None, stop: int | None = None) -> float:
        seg = self.samples[start:stop]
        return float(np.mean(np.abs(seg) ** 2)) if seg.size else 0.0


def cp_modulate(grid: SymbolGrid, cp_len: int = 16) -> SampleStream:
    if grid.scheme is not Scheme.CP_OFDM:
        raise ValueError("cp_modulate needs a CP-OFDM grid")
    sym = np.fft.ifft(grid.values, axis=0, norm="ortho")
    framed = np.vstack([sym[-cp_len:], sym]) if cp_len else sym
    return SampleStream(framed.T.ravel(), {"data": 0})


def cp_demodulate(stream, n_symb: int, K: int = 64, cp_len: int = 16, start: int = 0) -> SymbolGrid:
    samples = stream.samples if isinstance(stream, SampleStream) else np.asarray(stream)
    need = start + n_symb * (K + cp_len)
    if samples.size < need:
        raise ValueError(f"need {need} samples, got {samples.size}")
    block = samples[start:need].reshape(n_symb, K + cp_len)[:, cp_len:]
    return SymbolGrid(Scheme.CP_OFDM, np.fft.fft(block, axis=1, norm="ortho").T)


def build_cp_preamble() -> SampleStream:
    """Ten 16-sample short symbols, then a 32-sample guard and two long symbols."""
    short = np.fft.ifft(SHORT_TRAINING, norm="ortho")
    long_ = np.fft.ifft(LONG_TRAINING, norm="ortho")
    samples = np.concatenate([
        np.tile(short, 3)[: N_SHORT * SHORT_PERIOD],
        long_[-LONG_GI:],
        long_,
        long_,
    ])
    return SampleStream(samples, {"short": 0, "long": LONG_START})
