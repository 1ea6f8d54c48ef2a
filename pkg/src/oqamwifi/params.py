"""System constants, configuration validation and frame geometry.

All defaults follow the 20 MHz 802.11a numerology: 64 subcarriers at
312.5 kHz spacing, 52 used carriers (48 data + 4 pilots).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np


class ConfigError(ValueError):
    """Raised for inconsistent or unsupported system parameters."""


class Scheme(str, enum.Enum):
    CP_OFDM = "cp"
    OQAM_OFDM = "oqam"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"cp": cls.CP_OFDM, "cp_ofdm": cls.CP_OFDM,
                   "oqam": cls.OQAM_OFDM, "oqam_ofdm": cls.OQAM_OFDM, "fbmc": cls.OQAM_OFDM}
        if key not in aliases:
            raise ConfigError(f"unknown scheme {value!r}")
        return aliases[key]


SUPPORTED_ORDERS = (4, 16, 64)
SUPPORTED_RATES = (Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1))

# Logical subcarrier indices (DC = 0); FFT bin of index k is k mod K.
USED_CARRIERS = np.array([k for k in range(-26, 27) if k != 0])
PILOT_CARRIERS = np.array([-21, -7, 7, 21])
PILOT_VALUES = np.array([1.0, 1.0, 1.0, -1.0])
DATA_CARRIERS = np.array([k for k in USED_CARRIERS if k not in set(PILOT_CARRIERS.tolist())])

# 802.11a frame framing bits around the payload.
SERVICE_BITS = 16
TAIL_BITS = 6

CP_PREAMBLE_SAMPLES = 320
OQAM_PREAMBLE_SAMPLES = 512


def parse_rate(value) -> Fraction:
    """Accept ``Fraction``, float, or strings like ``"3/4"``."""
    if isinstance(value, Fraction):
        rate = value
    elif isinstance(value, str):
        rate = Fraction(value.strip())
    else:
        rate = Fraction(value).limit_denominator(16)
    if rate not in SUPPORTED_RATES:
        raise ConfigError(f"unsupported code rate {value!r}")
    return rate


def bits_per_symbol(M: int) -> int:
    if M not in SUPPORTED_ORDERS:
        raise ConfigError(f"unsupported modulation order {M!r}")
    return int(math.log2(M))


def data_bits_per_symbol(M: int, R) -> int:
    """Information bits carried by one multicarrier symbol (48 data carriers)."""
    n = 48 * bits_per_symbol(M) * parse_rate(R)
    if n.denominator != 1:
        raise ConfigError(f"R*48*ld(M) is not an integer for M={M}, R={R}")
    return int(n)


def n_symbols(M: int, R, payload_bytes: int) -> int:
    """Number of multicarrier symbols per frame.

    The 8x factor applies to a byte count, as in the 802.11a LENGTH field:
    16 service bits + 8*LENGTH payload bits + 6 tail bits, plus one symbol.
    """
    if payload_bytes < 1:
        raise ConfigError("payload_bytes must be >= 1")
    rate = parse_rate(R)
    frac = Fraction(SERVICE_BITS + 8 * payload_bytes + TAIL_BITS) / (48 * bits_per_symbol(M) * rate)
    return math.ceil(1 + frac)


@dataclass(frozen=True)
class SystemConfig:
    scheme: Scheme = Scheme.CP_OFDM
    bandwidth: float = 20e6
    sample_period: float = 50e-9
    n_subcarriers: int = 64
    n_used: int = 52
    n_data_carriers: int = 48
    n_pilots: int = 4
    modulation_order: int = 4
    code_rate: Fraction = Fraction(1, 2)
    code_depth: int = 6
    cp_overhead: float = 0.25
    overlap_factor: int = 4
    n_tr: int = 6
    payload_bytes: int = 4095
    cfo_range: tuple[float, float] = (-0.1, 0.1)

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "code_rate", parse_rate(self.code_rate))
        object.__setattr__(self, "cfo_range", tuple(float(c) for c in self.cfo_range))
        bits_per_symbol(self.modulation_order)
        if self.n_used != self.n_data_carriers + self.n_pilots:
            raise ConfigError("n_used must equal n_data_carriers + n_pilots")
        if self.n_used > self.n_subcarriers:
            raise ConfigError("more used carriers than subcarriers")
        K = self.n_subcarriers
        if K < 16 or K & (K - 1):
            raise ConfigError("n_subcarriers must be a power of two >= 16")
        if self.overlap_factor < 1:
            raise ConfigError("overlap_factor must be positive")
        lo, hi = self.cfo_range
        if lo > hi or max(abs(lo), abs(hi)) >= 0.5:
            raise ConfigError("cfo_range must lie inside (-0.5, 0.5) subcarrier spacings")
        if self.payload_bytes < 1:
            raise ConfigError("payload_bytes must be >= 1")
        data_bits_per_symbol(self.modulation_order, self.code_rate)

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    @property
    def bits_per_symbol(self) -> int:
        return bits_per_symbol(self.modulation_order)

    @property
    def n_dbps(self) -> int:
        return data_bits_per_symbol(self.modulation_order, self.code_rate)

    @property
    def n_cbps(self) -> int:
        return self.n_data_carriers * self.bits_per_symbol

    @property
    def payload_bits(self) -> int:
        return 8 * self.payload_bytes

    @property
    def subcarrier_spacing(self) -> float:
        return 1.0 / (self.n_subcarriers * self.sample_period)

    @property
    def cp_length(self) -> int:
        return int(round(self.cp_overhead * self.n_subcarriers))

    @property
    def n_symb(self) -> int:
        return n_symbols(self.modulation_order, self.code_rate, self.payload_bytes)

    @property
    def preamble_samples(self) -> int:
        return CP_PREAMBLE_SAMPLES if self.scheme is Scheme.CP_OFDM else OQAM_PREAMBLE_SAMPLES


@dataclass(frozen=True)
class FrameGeometry:
    n_symb: int
    L_data: int
    T_preamble: float
    T_trans: float
    frame_duration: float
    n_bit: int
    preamble_samples: int = 0
    trans_samples: int = 0

    @property
    def total_samples(self) -> int:
        return self.preamble_samples + self.L_data + self.trans_samples


def frame_geometry(cfg: SystemConfig) -> FrameGeometry:
    K, TS = cfg.n_subcarriers, cfg.sample_period
    n = cfg.n_symb
    if cfg.scheme is Scheme.CP_OFDM:
        L_data = K * n + cfg.cp_length * n
        trans = 0
    else:
        L_data = K * n
        # T_trans = T_S*K*(2(gamma-1) + 1/2)
        trans = K * (2 * (cfg.overlap_factor - 1)) + K // 2
    pre = cfg.preamble_samples
    return FrameGeometry(
        n_symb=n,
        L_data=L_data,
        T_preamble=pre * TS,
        T_trans=trans * TS,
        frame_duration=(pre + L_data + trans) * TS,
        n_bit=cfg.payload_bits,
        preamble_samples=pre,
        trans_samples=trans,
    )


def logical_to_bin(k, K: int = 64):
    """Map logical subcarrier index (negative allowed) to FFT bin."""
    return np.mod(k, K)
