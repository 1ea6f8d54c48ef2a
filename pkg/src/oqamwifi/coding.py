"""Convolutional coding for the 802.11a-style bit pipeline.

Mother code: rate 1/2, 6 memory elements (constraint length 7), generators
133/171 octal. Higher rates are obtained by puncturing; the decoder treats
punctured positions as erasures.
"""
from __future__ import annotations

from fractions import Fraction

import numba
import numpy as np

from .params import SERVICE_BITS, TAIL_BITS, parse_rate

G0 = 0o133
G1 = 0o171
MEMORY = 6
N_STATES = 1 << MEMORY
ERASURE = 2

# Keep-masks over the serialized stream [A0, B0, A1, B1, ...].
PUNCTURE_PATTERNS = {
    Fraction(1, 2): np.array([1, 1], dtype=bool),
    Fraction(2, 3): np.array([1, 1, 1, 0], dtype=bool),
    Fraction(3, 4): np.array([1, 1, 1, 0, 0, 1], dtype=bool),
}


def _taps(gen: int) -> np.ndarray:
    # index 0 = current input bit (generator MSB), index 6 = oldest
    return np.array([(gen >> (MEMORY - i)) & 1 for i in range(MEMORY + 1)], dtype=np.int64)


def conv_encode(bits) -> np.ndarray:
    """Rate-1/2 encoding from the zero state; output is [A0, B0, A1, B1, ...]."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size == 0:
        return np.zeros(0, dtype=np.uint8)
    a = np.convolve(bits, _taps(G0))[: bits.size] & 1
    b = np.convolve(bits, _taps(G1))[: bits.size] & 1
    out = np.empty(2 * bits.size, dtype=np.uint8)
    out[0::2] = a
    out[1::2] = b
    return out


def puncture(coded, R) -> np.ndarray:
    rate = parse_rate(R)
    coded = np.asarray(coded, dtype=np.uint8).ravel()
    if rate == 1:
        raise ValueError("rate 1 is uncoded; nothing to puncture")
    pattern = PUNCTURE_PATTERNS[rate]
    if coded.size % pattern.size:
        raise ValueError(f"coded length {coded.size} not a multiple of the puncturing period {pattern.size}")
    mask = np.tile(pattern, coded.size // pattern.size)
    return coded[mask]


def depuncture(bits, R) -> np.ndarray:
    """Re-insert punctured positions as ``ERASURE`` markers."""
    rate = parse_rate(R)
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    pattern = PUNCTURE_PATTERNS[rate]
    kept = int(pattern.sum())
    if bits.size % kept:
        raise ValueError(f"received length {bits.size} not a multiple of {kept}")
    mask = np.tile(pattern, bits.size // kept)
    out = np.full(mask.size, ERASURE, dtype=np.uint8)
    out[mask] = bits
    return out


def _trellis():
    n = N_STATES
    prev = np.zeros((n, 2), dtype=np.int64)
    out_a = np.zeros((n, 2), dtype=np.uint8)
    out_b = np.zeros((n, 2), dtype=np.uint8)
    t0, t1 = _taps(G0), _taps(G1)
    # state holds the last 6 inputs, most recent in bit 5
    for ns in range(n):
        bit = ns >> (MEMORY - 1)
        for x in range(2):
            ps = ((ns << 1) & (n - 1)) | x
            reg = [bit] + [(ps >> (MEMORY - 1 - i)) & 1 for i in range(MEMORY)]
            prev[ns, x] = ps
            out_a[ns, x] = int(np.dot(reg, t0)) & 1
            out_b[ns, x] = int(np.dot(reg, t1)) & 1
    return prev, out_a, out_b


_PREV, _OUT_A, _OUT_B = _trellis()


@numba.njit(cache=True)
def _viterbi_core(rx, prev, out_a, out_b):
    T = rx.size // 2
    n = prev.shape[0]
    big = 1 << 30
    metric = np.full(n, big, dtype=np.int64)
    metric[0] = 0
    new = np.empty(n, dtype=np.int64)
    decision = np.zeros((T, n), dtype=np.uint8)
    for t in range(T):
        ra = rx[2 * t]
        rb = rx[2 * t + 1]
        for ns in range(n):
            best = big * 2
            choice = 0
            for x in range(2):
                ps = prev[ns, x]
                bm = 0
                if ra != 2 and ra != out_a[ns, x]:
                    bm += 1
                if rb != 2 and rb != out_b[ns, x]:
                    bm += 1
                m = metric[ps] + bm
                if m < best:
                    best = m
                    choice = x
            new[ns] = best
            decision[t, ns] = choice
        for s in range(n):
            metric[s] = new[s]
    bits = np.zeros(T, dtype=np.uint8)
    state = 0
    for t in range(T - 1, -1, -1):
        bits[t] = state >> 5
        state = prev[state, decision[t, state]]
    return bits


def viterbi_decode(hard_bits, R, n_info: int | None = None) -> np.ndarray:
    """Hard-decision ML decoding, terminated in the zero state.

    ``hard_bits`` are the received (possibly punctured) code bits; for
    R > 1/2 punctured positions become erasures before decoding. Returns the
    first ``n_info`` decoded bits (all of them when ``n_info`` is None).
    """
    rate = parse_rate(R)
    rx = np.asarray(hard_bits, dtype=np.uint8).ravel()
    if rate != Fraction(1, 2):
        rx = depuncture(rx, rate)
    if rx.size % 2:
        raise ValueError("mother-code stream must have even length")
    decoded = _viterbi_core(rx, _PREV, _OUT_A, _OUT_B)
    if n_info is None:
        return decoded
    if n_info > decoded.size:
        raise ValueError(f"requested {n_info} bits from a {decoded.size}-bit trellis")
    return decoded[:n_info]


def frame_bits(payload_bits, n_symb: int, n_dbps: int) -> np.ndarray:
    """16 zero service bits + payload + 6 zero tail bits, zero-padded to fill n_symb symbols."""
    payload_bits = np.asarray(payload_bits, dtype=np.uint8).ravel()
    total = n_symb * n_dbps
    used = SERVICE_BITS + payload_bits.size + TAIL_BITS
    if used > total:
        raise ValueError(f"{used} bits do not fit into {n_symb} symbols of {n_dbps} bits")
    out = np.zeros(total, dtype=np.uint8)
    out[SERVICE_BITS:SERVICE_BITS + payload_bits.size] = payload_bits
    return out


def interleave_permutation(n_cbps: int, n_bpsc: int) -> np.ndarray:
    """802.11a two-step block interleaver: output position of each input bit."""
    k = np.arange(n_cbps)
    i = (n_cbps // 16) * (k % 16) + k // 16
    s = max(n_bpsc // 2, 1)
    j = s * (i // s) + (i + n_cbps - (16 * i) // n_cbps) % s
    return j


def interleave(bits, n_cbps: int, n_bpsc: int) -> np.ndarray:
    bits = np.asarray(bits).ravel()
    perm = interleave_permutation(n_cbps, n_bpsc)
    blocks = bits.reshape(-1, n_cbps)
    out = np.empty_like(blocks)
    out[:, perm] = blocks
    return out.ravel()


def deinterleave(bits, n_cbps: int, n_bpsc: int) -> np.ndarray:
    bits = np.asarray(bits).ravel()
    perm = interleave_permutation(n_cbps, n_bpsc)
    return bits.reshape(-1, n_cbps)[:, perm].ravel()


def encode_frame(payload_bits, n_symb: int, n_dbps: int, R, n_bpsc: int) -> np.ndarray:
    """Frame, encode, puncture and interleave; returns n_symb*48*n_bpsc code bits."""
    rate = parse_rate(R)
    framed = frame_bits(payload_bits, n_symb, n_dbps)
    if rate == 1:
        coded = framed
    else:
        coded = conv_encode(framed)
        if rate != Fraction(1, 2):
            coded = puncture(coded, rate)
    return interleave(coded, 48 * n_bpsc, n_bpsc)


def decode_frame(hard_bits, n_payload_bits: int, R, n_bpsc: int) -> np.ndarray:
    rate = parse_rate(R)
    coded = deinterleave(hard_bits, 48 * n_bpsc, n_bpsc)
    if rate == 1:
        framed = coded
    else:
        framed = viterbi_decode(coded, rate)
    return framed[SERVICE_BITS:SERVICE_BITS + n_payload_bits].astype(np.uint8)
