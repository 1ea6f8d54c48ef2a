"""Closed-form spectral efficiency, throughput and complexity accounting.

Complexities count real multiplications per payload bit. FFTs are counted
with the split-radix figure K(ld K - 3) + 4 real multiplications.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .params import (SUPPORTED_ORDERS, SUPPORTED_RATES, TAIL_BITS, ConfigError, Scheme,
                     SystemConfig, frame_geometry, parse_rate)


@dataclass(frozen=True)
class EfficiencyReport:
    eta: float
    eta_hat: float
    throughput: float
    frame_duration: float


@dataclass(frozen=True)
class ComplexityReport:
    C_mod_oqam: float
    C_mod_cp: float
    C_vit: float
    C_post_oqam: float
    C_post_cp: float
    c_mod: float
    c_sys_tx: float
    c_sys_rx: float
    c_sys: float


def effective_efficiency(eta: float, fer: float) -> float:
    if not 0.0 <= fer <= 1.0:
        raise ValueError(f"FER {fer} outside [0, 1]")
    return eta * (1.0 - fer)


def spectral_efficiency(cfg: SystemConfig, fer: float = 0.0) -> EfficiencyReport:
    geo = frame_geometry(cfg)
    eta = geo.n_bit / (cfg.bandwidth * geo.frame_duration)
    return EfficiencyReport(eta, effective_efficiency(eta, fer), eta * cfg.bandwidth, geo.frame_duration)


def _ld(K: int) -> int:
    if K < 16 or K & (K - 1):
        raise ConfigError("K must be a power of two >= 16")
    return K.bit_length() - 1


def split_radix_mults(K: int) -> int:
    return K * (_ld(K) - 3) + 4


def mod_mults_per_symbol(scheme, K: int = 64, overlap: int = 4) -> int:
    """Real multiplications to (de)modulate one multicarrier symbol.

    OQAM runs two K-point transforms plus the 2*gamma*K polyphase products
    per complex symbol, doubled for the two real half-symbols.
    """
    if Scheme.parse(scheme) is Scheme.CP_OFDM:
        return split_radix_mults(K)
    return 2 * (2 * K + split_radix_mults(K) + 2 * overlap * K)


def modulation_complexity(cfg: SystemConfig) -> float:
    """Data-part (de)modulation cost per payload bit."""
    return mod_mults_per_symbol(cfg.scheme, cfg.n_subcarriers, cfg.overlap_factor) * cfg.n_symb / cfg.payload_bits


def relative_mod_complexity(K: int = 64, overlap: int = 4) -> float:
    return 2 + 4 * (overlap + 1) / (_ld(K) - 3 + 4 / K)


def viterbi_complexity(R, n_bit: int = 32760, n_tail: int = TAIL_BITS) -> float:
    """Two multiplications per received code bit; zero for the uncoded case."""
    rate = parse_rate(R)
    if rate == 1:
        return 0.0
    return math.ceil(Fraction(1) / rate * 2 * (n_bit + n_tail)) / n_bit


def post_complexity(cfg: SystemConfig) -> float:
    """Equalization and phase correction cost per payload bit."""
    n = cfg.n_symb
    factor = 3 if cfg.scheme is Scheme.OQAM_OFDM else 2
    return 4 * cfg.n_used * (factor * n + 1) / cfg.payload_bits


def preamble_symbols(scheme, K: int = 64, cp_length: int = 16, preamble_samples: int | None = None) -> int:
    """Preamble length in multicarrier symbol durations."""
    cfg = SystemConfig(scheme=scheme, n_subcarriers=K)
    pre = cfg.preamble_samples if preamble_samples is None else preamble_samples
    sym = K + cp_length if cfg.scheme is Scheme.CP_OFDM else K
    return pre // sym


def system_complexity(M: int = 4, R=Fraction(1, 2), payload_bytes: int = 4095, *,
                      K: int = 64, overlap: int = 4, count_preamble: bool = True) -> ComplexityReport:
    """OQAM-versus-CP cost ratios at equal M, R and payload.

    With ``count_preamble`` the modulation cost of each system includes its
    preamble (8 symbol durations for OQAM, 4 for CP), which the receiver
    also has to process.
    """
    oq = SystemConfig(scheme=Scheme.OQAM_OFDM, modulation_order=M, code_rate=R,
                      payload_bytes=payload_bytes, n_subcarriers=K, overlap_factor=overlap)
    cp = oq.with_(scheme=Scheme.CP_OFDM)
    n_bit = oq.payload_bits
    extra_o = preamble_symbols(Scheme.OQAM_OFDM, K) if count_preamble else 0
    extra_c = preamble_symbols(Scheme.CP_OFDM, K, cp.cp_length) if count_preamble else 0
    cm_o = mod_mults_per_symbol(Scheme.OQAM_OFDM, K, overlap) * (oq.n_symb + extra_o) / n_bit
    cm_c = mod_mults_per_symbol(Scheme.CP_OFDM, K) * (cp.n_symb + extra_c) / n_bit
    cv = viterbi_complexity(R, n_bit)
    cp_o, cp_c = post_complexity(oq), post_complexity(cp)
    c_mod = relative_mod_complexity(K, overlap)
    return ComplexityReport(
        C_mod_oqam=cm_o, C_mod_cp=cm_c, C_vit=cv, C_post_oqam=cp_o, C_post_cp=cp_c,
        c_mod=c_mod, c_sys_tx=c_mod,
        c_sys_rx=(cm_o + cp_o + cv) / (cm_c + cp_c + cv),
        c_sys=(2 * cm_o + cp_o + cv) / (2 * cm_c + cp_c + cv),
    )


# --------------------------------------------------------------------------
# Table replicas

TABLE2_HEADER = ("scheme", "M", "frame_ms", "throughput_mbps", "eta")
TABLE3_RATES = (Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1))


def table2_rows(payload_bytes: int = 4095, R=Fraction(1, 2)) -> list[dict]:
    rows = []
    for scheme in (Scheme.CP_OFDM, Scheme.OQAM_OFDM):
        for M in SUPPORTED_ORDERS:
            rep = spectral_efficiency(SystemConfig(scheme=scheme, modulation_order=M,
                                                   code_rate=R, payload_bytes=payload_bytes))
            rows.append({"scheme": scheme.value, "M": M, "frame_ms": rep.frame_duration * 1e3,
                         "throughput_mbps": rep.throughput / 1e6, "eta": rep.eta})
    return rows


def table3_rows(payload_bytes: int = 4095, count_preamble: bool = True) -> list[dict]:
    rows = []
    for M in SUPPORTED_ORDERS:
        for R in TABLE3_RATES:
            rep = system_complexity(M, R, payload_bytes, count_preamble=count_preamble)
            rows.append({"M": M, "R": str(R), "c_sys_tx": rep.c_sys_tx,
                         "c_sys_rx": rep.c_sys_rx, "c_sys": rep.c_sys})
    return rows


def format_csv(rows: list[dict], header, digits: int = 4) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = [f"{row[h]:.{digits}f}" if isinstance(row[h], float) else str(row[h]) for h in header]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def format_text(rows: list[dict], header, digits: int = 2) -> str:
    cells = [[str(h) for h in header]]
    for row in rows:
        cells.append([f"{row[h]:.{digits}f}" if isinstance(row[h], float) else str(row[h]) for h in header])
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells) + "\n"


def table2_csv(payload_bytes: int = 4095) -> str:
    return format_csv(table2_rows(payload_bytes), TABLE2_HEADER)


def table3_csv(payload_bytes: int = 4095) -> str:
    return format_csv(table3_rows(payload_bytes), ("M", "R", "c_sys_tx", "c_sys_rx", "c_sys"))


assert set(TABLE3_RATES) == set(SUPPORTED_RATES)
