"""OQAM-OFDM modem: PHYDYAS prototype, polyphase banks, intrinsic interference.

Conventions used throughout this module
---------------------------------------
A real grid ``a[k, n]`` (FFT bin k, half-symbol slot n) is transmitted as

    s[m] = sum_{k,n} a[k,n] * j^(k+n) * p[m - n*K/2] * exp(j*2*pi*k*(m - D/2)/K)

with D = gamma*K - 1 and m the absolute sample index. The analysis bank
applies the matched filter, so that for a back-to-back link the complex
output at (k, n) is ``a[k,n]`` plus a purely imaginary intrinsic term; the
real part recovers the symbol.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cp_ofdm import LONG_TRAINING, SampleStream
from .mapping import SymbolGrid
from .params import ConfigError, Scheme, USED_CARRIERS

# Published frequency-sampling coefficients (P_0 = 1 implied).
_PHYDYAS_P = {
    2: (np.sqrt(2) / 2,),
    3: (0.91143783, 0.41143783),
    4: (0.97195983, np.sqrt(2) / 2, np.sqrt(1 - 0.97195983 ** 2)),
}


@dataclass(frozen=True)
class PrototypeFilter:
    coefficients: np.ndarray
    K: int
    overlap: int
    freq_samples: tuple

    @property
    def length(self) -> int:
        return self.coefficients.size

    @property
    def delay(self) -> int:
        """Group delay D of the linear-phase filter, in samples."""
        return self.length - 1


def design_prototype(K: int = 64, overlap: int = 4) -> PrototypeFilter:
    """Frequency-sampling PHYDYAS design, normalized to unit energy.

    The cosine series is sampled at half-integer points so the filter is
    exactly symmetric about (gamma*K - 1)/2.
    """
    if overlap not in _PHYDYAS_P:
        raise ConfigError(f"no PHYDYAS coefficients for overlap factor {overlap}")
    if K < 4 or K & (K - 1):
        raise ConfigError("K must be a power of two")
    P = np.array((1.0,) + tuple(_PHYDYAS_P[overlap]))
    L = overlap * K
    m = np.arange(L) + 0.5
    l = np.arange(1, overlap)
    h = P[0] + 2 * np.sum(((-1.0) ** l * P[1:])[:, None] * np.cos(2 * np.pi * l[:, None] * m / L), axis=0)
    h /= np.sqrt(np.sum(h ** 2))
    return PrototypeFilter(h, K, overlap, tuple(P))


def dump_coefficients(proto: PrototypeFilter, path) -> Path:
    """Plain-text dump, one coefficient per line."""
    path = Path(path)
    np.savetxt(path, proto.coefficients, fmt="%.17e")
    return path


def load_coefficients(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=1)


def _theta(K: int, n_slots: int, slot0: int = 0) -> np.ndarray:
    k = np.arange(K)[:, None]
    n = np.arange(slot0, slot0 + n_slots)[None, :]
    return 1j ** ((k + n) % 4)


def _as_values(grid) -> np.ndarray:
    if isinstance(grid, SymbolGrid):
        if grid.scheme is not Scheme.OQAM_OFDM:
            raise ValueError("synthesis needs an OQAM grid")
        return np.asarray(grid.values, dtype=float)
    return np.asarray(grid, dtype=float)


def output_length(n_slots: int, proto: PrototypeFilter) -> int:
    return (n_slots - 1) * (proto.K // 2) + proto.length


def synthesis(grid, proto: PrototypeFilter) -> SampleStream:
    """Polyphase synthesis bank: K-point IDFT per slot, filter, overlap-add at hop K/2."""
    a = _as_values(grid)
    K, N = a.shape
    if K != proto.K:
        raise ValueError(f"grid has {K} rows, filter designed for K={proto.K}")
    L, half, D = proto.length, K // 2, proto.delay
    x = a * _theta(K, N) * np.exp(-1j * np.pi * np.arange(K) * D / K)[:, None]
    v = K * np.fft.ifft(x, axis=0)                                   # (K, N)
    idx = (np.arange(N)[:, None] * half + np.arange(L)[None, :]) % K  # (N, L)
    seg = v[idx, np.arange(N)[:, None]] * proto.coefficients          # (N, L)
    blocks = 2 * proto.overlap
    out = np.zeros((N + blocks - 1, half), dtype=complex)
    seg = seg.reshape(N, blocks, half)
    for c in range(blocks):
        out[c:c + N] += seg[:, c]
    return SampleStream(out.ravel(), {"data": 0})


def analysis_complex(stream, proto: PrototypeFilter, n_slots: int, start: int = 0) -> np.ndarray:
    """Matched analysis bank; returns the complex (K, n_slots) output before Re{}."""
    s = stream.samples if isinstance(stream, SampleStream) else np.asarray(stream)
    K, L, half, D = proto.K, proto.length, proto.K // 2, proto.delay
    need = start + (n_slots - 1) * half + L
    if start < 0 or s.size < need:
        raise ValueError(f"need samples [{start}, {need}), stream has {s.size}")
    idx = start + np.arange(n_slots)[:, None] * half + np.arange(L)[None, :]
    frames = s[idx] * proto.coefficients
    folded = frames.reshape(n_slots, proto.overlap, K).sum(axis=1)
    Y = np.fft.fft(folded, axis=1).T                                  # (K, N)
    k = np.arange(K)[:, None]
    n = np.arange(n_slots)[None, :]
    sign = np.where((k * n) % 2, -1.0, 1.0)
    return Y * sign * np.exp(1j * np.pi * k * D / K) * np.conj(_theta(K, n_slots))


def analysis(stream, proto: PrototypeFilter, n_slots: int, start: int = 0) -> SymbolGrid:
    z = analysis_complex(stream, proto, n_slots, start)
    return SymbolGrid(Scheme.OQAM_OFDM, z.real.copy())


# --------------------------------------------------------------------------
# Intrinsic interference

@dataclass(frozen=True)
class InterferenceWeights:
    """Transmultiplexer coupling weights.

    ``tables[(k % 2, n % 2)][dk + span_k, dn + span_n]`` is the complex
    contribution of a unit real symbol at (k+dk, n+dn) to the analysis
    output at (k, n). The sign pattern depends on the parity of the
    receiving position, hence one table per parity class.
    """
    tables: dict
    span_k: int
    span_n: int

    def w(self, dk: int, dn: int, k: int = 0, n: int = 0) -> complex:
        if abs(dk) > self.span_k or abs(dn) > self.span_n:
            return 0j
        return complex(self.tables[(k % 2, n % 2)][dk + self.span_k, dn + self.span_n])

    def table(self, k: int = 0, n: int = 0) -> np.ndarray:
        return self.tables[(k % 2, n % 2)]


@functools.lru_cache(maxsize=8)
def _weights_cached(K: int, overlap: int, span_k: int, span_n: int) -> InterferenceWeights:
    proto = design_prototype(K, overlap)
    return _compute_weights(proto, span_k, span_n)


def _compute_weights(proto: PrototypeFilter, span_k: int, span_n: int) -> InterferenceWeights:
    K = proto.K
    n_slots = 2 * span_n + 2 * proto.overlap + 4
    k0, n0 = 2 * span_k + 2, span_n + proto.overlap + 1
    tables = {}
    for pk in (0, 1):
        for pn in (0, 1):
            tab = np.zeros((2 * span_k + 1, 2 * span_n + 1), dtype=complex)
            kr, nr = k0 + pk, n0 + pn
            for dn in range(-span_n, span_n + 1):
                for dk in range(-span_k, span_k + 1):
                    a = np.zeros((K, n_slots))
                    a[(kr + dk) % K, nr + dn] = 1.0
                    z = analysis_complex(synthesis(a, proto), proto, n_slots)
                    tab[dk + span_k, dn + span_n] = z[kr, nr]
            tables[(pk, pn)] = tab
    return InterferenceWeights(tables, span_k, span_n)


def intrinsic_weights(proto: PrototypeFilter, span_k: int = 1, span_n: int = 3) -> InterferenceWeights:
    """Impulse-response measurement of the neighbourhood weights."""
    fresh = design_prototype(proto.K, proto.overlap)
    if np.array_equal(fresh.coefficients, proto.coefficients):
        return _weights_cached(proto.K, proto.overlap, span_k, span_n)
    return _compute_weights(proto, span_k, span_n)


def interference_at(values: np.ndarray, weights: InterferenceWeights, k: int, n: int,
                    exclude=()) -> complex:
    """Sum of neighbour contributions at (k, n), center and ``exclude`` offsets omitted."""
    K, N = values.shape
    sk, sn = weights.span_k, weights.span_n
    tab = weights.table(k, n).copy()
    tab[sk, sn] = 0
    for dk, dn in exclude:
        tab[dk + sk, dn + sn] = 0
    rows = (k + np.arange(-sk, sk + 1)) % K
    cols = n + np.arange(-sn, sn + 1)
    ok = (cols >= 0) & (cols < N)
    patch = values[np.ix_(rows, cols[ok])]
    return complex(np.sum(tab[:, ok] * patch))


# Neighbourhood used for auxiliary pilots and pseudo-pilots. Wider than the
# |dk|<=1, |dn|<=3 core so the cancelation residual stays near 1e-4.
AUX_SPAN_K = 3
AUX_SPAN_N = 7
MIN_AUX_WEIGHT = 0.1


def insert_auxiliary_pilots(grid: SymbolGrid, weights: InterferenceWeights) -> SymbolGrid:
    """Fill the aux slots so every pilot is received at exactly its nominal value.

    The aux pilot of one pilot also couples into neighbouring pilots on the
    same carrier, so each carrier is solved jointly. The aux values cancel
    the imaginary intrinsic term; the small real leakage of the
    near-perfect-reconstruction filter is absorbed by a correction of the
    order of 1e-3 on the pilot slot itself.
    """
    if grid.pilot_mask is None or grid.aux_mask is None:
        raise ValueError("grid has no pilot/aux marking")
    vals = np.array(grid.values, dtype=float)
    vals[grid.aux_mask] = 0.0
    nominal = vals.copy()
    pk, pn = np.nonzero(grid.pilot_mask)
    for b in np.unique(pk):
        slots = np.sort(pn[pk == b])
        aux = slots + 1
        if not np.all(grid.aux_mask[b, aux]):
            raise ValueError(f"pilot on bin {b} without a following aux slot")
        for s in slots:
            if abs(weights.w(0, 1, b, s)) < MIN_AUX_WEIGHT:
                raise ConfigError("auxiliary pilot weight too small for stable cancelation")
        n = slots.size
        # unknowns: [aux values, pilot corrections]; rows: [Im parts, Re parts]
        A = np.zeros((2 * n, 2 * n))
        rhs = np.zeros(2 * n)
        for i, s in enumerate(slots):
            known = interference_at(nominal, weights, b, s)
            rhs[i], rhs[n + i] = -known.imag, -known.real
            for j in range(n):
                wa = weights.w(0, aux[j] - s, b, s)
                wp = 1.0 if i == j else weights.w(0, slots[j] - s, b, s)
                A[i, j], A[n + i, j] = wa.imag, wa.real
                A[i, n + j], A[n + i, n + j] = wp.imag, wp.real
        sol = np.linalg.solve(A, rhs)
        vals[b, aux] = sol[:n]
        vals[b, slots] += sol[n:]
    return SymbolGrid(grid.scheme, vals, grid.roles, grid.pilot_mask, grid.aux_mask)


def aux_energy_fraction(grid: SymbolGrid) -> float:
    """Share of the grid energy spent on auxiliary pilots."""
    total = float(np.sum(grid.values ** 2))
    if grid.aux_mask is None or total == 0:
        return 0.0
    return float(np.sum(grid.values[grid.aux_mask] ** 2)) / total


# --------------------------------------------------------------------------
# Preamble and frame layout
#
# [0, lead)              zeros, lead = (gamma-2)K - 1 (start of the sync window)
# [lead, (N_TR+3)K)      exactly K-periodic training waveform
# (N_TR+3)K onwards      second bank: slot 0 = CE symbol, slots 1..3 zero,
#                        data from slot CE_SLOTS
CE_SLOTS = 4


def sync_lead(K: int = 64, overlap: int = 4) -> int:
    return (overlap - 2) * K - 1


def sync_length(K: int = 64, n_tr: int = 6) -> int:
    return (n_tr + 3) * K


def _training_pair(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Real values (b_k, c_k) for the alternating training pair, |b + jc| = 1."""
    b = np.zeros(K)
    b[np.mod(np.arange(-26, 27), K)] = LONG_TRAINING[np.mod(np.arange(-26, 27), K)].real
    b /= np.sqrt(2)
    return b, b.copy()


def _periodic_training(proto: PrototypeFilter, length: int) -> np.ndarray:
    """Steady-state output of the repeated pair (b, c, -b, -c, ...)."""
    K, half = proto.K, proto.K // 2
    n_slots = 2 * proto.overlap + 2 * (-(-length // K)) + 4
    b, c = _training_pair(K)
    a = np.zeros((K, n_slots))
    sign = np.where((np.arange(n_slots) // 2) % 2, -1.0, 1.0)
    a[:, 0::2] = b[:, None] * sign[0::2]
    a[:, 1::2] = c[:, None] * sign[1::2]
    s = synthesis(a, proto).samples
    steady = (2 * proto.overlap - 1) * half
    return s[steady:steady + length]


@functools.lru_cache(maxsize=8)
def ce_sequence(K: int = 64, overlap: int = 4) -> np.ndarray:
    """CE values on the used carriers (bins), chosen for large pseudo-pilots.

    A period-4 +-1 pattern over the carrier index is searched exhaustively;
    the one maximizing min |c_k| over the used carriers wins (ties: first).
    """
    weights = _weights_cached(K, overlap, AUX_SPAN_K, AUX_SPAN_N)
    used = np.mod(USED_CARRIERS, K)
    best, best_val = None, -1.0
    for code in range(16):
        pat = np.array([1.0 if (code >> i) & 1 else -1.0 for i in range(4)])
        seq = np.zeros(K)
        seq[used] = pat[np.mod(USED_CARRIERS, 4)]
        c = pseudo_pilots(seq, weights)
        val = float(np.min(np.abs(c[used])))
        if val > best_val + 1e-12:
            best, best_val = seq, val
    return best


def pseudo_pilots(ce_values: np.ndarray, weights: InterferenceWeights, slot: int = 0) -> np.ndarray:
    """Known CE value plus the intrinsic contribution of the known CE neighbours.

    Only the CE slot itself is known (the guard slots are zero), so the
    neighbours are the adjacent carriers within the same slot.
    """
    ce = np.asarray(ce_values, dtype=float)
    K = ce.size
    sk, sn = weights.span_k, weights.span_n
    out = ce.astype(complex)
    for k in range(K):
        tab = weights.table(k, slot)
        for dk in range(-sk, sk + 1):
            if dk:
                out[k] += tab[dk + sk, sn] * ce[(k + dk) % K]
    return out


def build_oqam_preamble(proto: PrototypeFilter, n_tr: int = 6) -> SampleStream:
    """Sync section (zero lead-in + periodic training) followed by the CE symbol.

    Markers: ``sync`` (first periodic sample), ``bank`` (start of the CE/data
    bank) and ``ce`` (the CE slot's filter peak).
    """
    K = proto.K
    lead = sync_lead(K, proto.overlap)
    total = sync_length(K, n_tr)
    sync = np.zeros(total, dtype=complex)
    sync[lead:] = _periodic_training(proto, total - lead)
    ce = np.zeros((K, CE_SLOTS))
    ce[:, 0] = ce_sequence(K, proto.overlap)
    bank = synthesis(ce, proto).samples
    samples = np.concatenate([sync, bank])
    return SampleStream(samples, {"sync": lead, "bank": total, "ce": total + proto.delay // 2})


def bank_grid(data_grid: SymbolGrid, K: int = 64, overlap: int = 4) -> SymbolGrid:
    """Prepend the CE slot and the zero guard slots to an allocated data grid."""
    n = data_grid.n_cols
    vals = np.zeros((K, CE_SLOTS + n))
    vals[:, 0] = ce_sequence(K, overlap)
    vals[:, CE_SLOTS:] = data_grid.values
    pad = np.zeros((K, CE_SLOTS), dtype=bool)
    pm = None if data_grid.pilot_mask is None else np.hstack([pad, data_grid.pilot_mask])
    am = None if data_grid.aux_mask is None else np.hstack([pad, data_grid.aux_mask])
    return SymbolGrid(Scheme.OQAM_OFDM, vals, data_grid.roles, pm, am)
