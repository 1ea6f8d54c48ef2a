"""QAM mapping, OQAM staggering and subcarrier allocation."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .params import (DATA_CARRIERS, PILOT_CARRIERS, PILOT_VALUES, USED_CARRIERS,
                     Scheme, bits_per_symbol)

# Per-axis Gray labels -> amplitude, 802.11a bit order (first bit = MSB).
_AXIS_LEVELS = {
    1: {0b0: -1, 0b1: 1},
    2: {0b00: -3, 0b01: -1, 0b11: 1, 0b10: 3},
    3: {0b000: -7, 0b001: -5, 0b011: -3, 0b010: -1,
        0b110: 1, 0b111: 3, 0b101: 5, 0b100: 7},
}
_KMOD = {4: 1 / np.sqrt(2), 16: 1 / np.sqrt(10), 64: 1 / np.sqrt(42)}


class CarrierRole(enum.IntEnum):
    DATA = 0
    PILOT = 1
    AUX_PILOT = 2
    GUARD = 3
    DC = 4


def carrier_map(K: int = 64) -> np.ndarray:
    """Role of every FFT bin."""
    roles = np.full(K, CarrierRole.GUARD, dtype=np.int8)
    roles[0] = CarrierRole.DC
    roles[np.mod(DATA_CARRIERS, K)] = CarrierRole.DATA
    roles[np.mod(PILOT_CARRIERS, K)] = CarrierRole.PILOT
    return roles


def _axis_table(half: int) -> np.ndarray:
    # amplitude indexed by Gray label, so argmin over it breaks ties toward smaller labels
    table = _AXIS_LEVELS[half]
    return np.array([table[label] for label in range(1 << half)], dtype=float)


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


def qam_map(bits, M: int) -> np.ndarray:
    nb = bits_per_symbol(M)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % nb:
        raise ValueError(f"{bits.size} bits is not a multiple of {nb}")
    half = nb // 2
    groups = bits.reshape(-1, nb)
    table = _axis_table(half)
    i = table[_bits_to_int(groups[:, :half])]
    q = table[_bits_to_int(groups[:, half:])]
    return (i + 1j * q) * _KMOD[M]


def qam_demap(symbols, M: int) -> np.ndarray:
    """Nearest-point hard decisions; ties go to the smaller Gray label per axis."""
    nb = bits_per_symbol(M)
    half = nb // 2
    table = _axis_table(half)
    sym = np.asarray(symbols, dtype=complex).ravel() / _KMOD[M]
    out = np.empty((sym.size, nb), dtype=np.uint8)
    shifts = np.arange(half - 1, -1, -1)
    for col, axis in ((0, sym.real), (half, sym.imag)):
        label = np.argmin(np.abs(axis[:, None] - table[None, :]), axis=1)
        out[:, col:col + half] = (label[:, None] >> shifts) & 1
    return out.ravel()


def constellation(M: int) -> np.ndarray:
    nb = bits_per_symbol(M)
    labels = np.arange(M)
    bits = ((labels[:, None] >> np.arange(nb - 1, -1, -1)) & 1)
    return qam_map(bits.ravel(), M)


def oqam_stagger(symbols, carriers=None) -> np.ndarray:
    """Split complex symbols (rows = carriers, cols = symbols) into real half-slots.

    Even carriers send the real part first, odd carriers the imaginary part
    first, so neighbouring carriers are offset by half a symbol. ``carriers``
    gives the subcarrier index of each row (defaults to the row index).
    """
    c = np.asarray(symbols, dtype=complex)
    rows, n = c.shape
    parity = (np.arange(rows) if carriers is None else np.asarray(carriers)) % 2
    out = np.empty((rows, 2 * n))
    odd = parity.astype(bool)
    out[~odd, 0::2] = c[~odd].real
    out[~odd, 1::2] = c[~odd].imag
    out[odd, 0::2] = c[odd].imag
    out[odd, 1::2] = c[odd].real
    return out


def oqam_destagger(real_grid, carriers=None) -> np.ndarray:
    a = np.asarray(real_grid, dtype=float)
    rows = a.shape[0]
    parity = (np.arange(rows) if carriers is None else np.asarray(carriers)) % 2
    odd = parity.astype(bool)
    out = np.empty((rows, a.shape[1] // 2), dtype=complex)
    out[~odd] = a[~odd, 0::2] + 1j * a[~odd, 1::2]
    out[odd] = a[odd, 1::2] + 1j * a[odd, 0::2]
    return out


@dataclass
class SymbolGrid:
    """Subcarrier values, rows in FFT-bin order.

    CP-OFDM grids are complex K x n_symb. OQAM grids are real K x 2*n_symb
    half-symbol slots; the j^(k+n) phase is applied inside the modem.
    """
    scheme: Scheme
    values: np.ndarray
    roles: np.ndarray = field(default_factory=carrier_map)
    pilot_mask: np.ndarray | None = None
    aux_mask: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


# OQAM pilots: each pilot carrier sends its pilot in every other complex
# symbol (two pilot carriers per symbol), at the even half-slot, with the
# auxiliary pilot in the following half-slot.
OQAM_PILOT_GROUPS = (np.array([0, 2]), np.array([1, 3]))


def oqam_pilot_positions(n_symb: int, K: int = 64):
    """(bin, slot, value) triples for pilots and the matching aux slots."""
    bins, slots, values = [], [], []
    for i in range(n_symb):
        for p in OQAM_PILOT_GROUPS[i % 2]:
            bins.append(PILOT_CARRIERS[p] % K)
            slots.append(2 * i)
            values.append(PILOT_VALUES[p])
    return np.array(bins), np.array(slots), np.array(values)


def allocate_carriers(data_syms, scheme, n_symb: int, K: int = 64) -> SymbolGrid:
    """Place 48*n_symb complex data symbols and the pilots on a grid.

    Pilots sit at subcarriers {-21, -7, 7, 21} with values +1, +1, +1, -1.
    OQAM grids also reserve one auxiliary slot after each pilot (left at 0
    here; the OQAM modem fills it).
    """
    scheme = Scheme.parse(scheme)
    data = np.asarray(data_syms, dtype=complex).ravel()
    n_data = len(DATA_CARRIERS)
    if data.size != n_data * n_symb:
        raise ValueError(f"expected {n_data * n_symb} data symbols, got {data.size}")
    block = data.reshape(n_symb, n_data).T
    dbins = np.mod(DATA_CARRIERS, K)
    pbins = np.mod(PILOT_CARRIERS, K)
    if scheme is Scheme.CP_OFDM:
        grid = np.zeros((K, n_symb), dtype=complex)
        grid[dbins] = block
        grid[pbins] = PILOT_VALUES[:, None]
        return SymbolGrid(scheme, grid)
    grid = np.zeros((K, 2 * n_symb))
    grid[dbins] = oqam_stagger(block, DATA_CARRIERS)
    pilot_mask = np.zeros_like(grid, dtype=bool)
    aux_mask = np.zeros_like(grid, dtype=bool)
    b, s, v = oqam_pilot_positions(n_symb, K)
    grid[b, s] = v
    pilot_mask[b, s] = True
    aux_mask[b, s + 1] = True
    return SymbolGrid(scheme, grid, pilot_mask=pilot_mask, aux_mask=aux_mask)


def extract_data(grid_values, scheme, K: int = 64) -> np.ndarray:
    """Inverse of allocate_carriers for the data symbols (symbol-major order)."""
    scheme = Scheme.parse(scheme)
    dbins = np.mod(DATA_CARRIERS, K)
    if scheme is Scheme.CP_OFDM:
        return np.asarray(grid_values)[dbins].T.ravel()
    return oqam_destagger(np.asarray(grid_values)[dbins], DATA_CARRIERS).T.ravel()


def used_bins(K: int = 64) -> np.ndarray:
    return np.mod(USED_CARRIERS, K)
