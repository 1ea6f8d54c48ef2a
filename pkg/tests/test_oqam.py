import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oqamwifi import mapping, oqam
from oqamwifi.params import ConfigError, Scheme, USED_CARRIERS


def direct_synthesis(a, p, K):
    """Per-carrier filtering by explicit summation (oracle)."""
    L = p.size
    D = L - 1
    n_k, n_n = a.shape
    out = np.zeros((n_n - 1) * K // 2 + L, dtype=complex)
    m = np.arange(out.size)
    for k in range(n_k):
        for n in range(n_n):
            if a[k, n] == 0:
                continue
            idx = m - n * K // 2
            ok = (idx >= 0) & (idx < L)
            out[ok] += a[k, n] * 1j ** ((k + n) % 4) * p[idx[ok]] * np.exp(2j * np.pi * k * (m[ok] - D / 2) / K)
    return out


def direct_analysis(s, p, K, n_slots):
    L = p.size
    D = L - 1
    z = np.zeros((K, n_slots), dtype=complex)
    for k in range(K):
        for n in range(n_slots):
            m = n * K // 2 + np.arange(L)
            z[k, n] = np.sum(s[m] * p * np.exp(-2j * np.pi * k * (m - D / 2) / K)) * (-1j) ** ((k + n) % 4)
    return z


def test_prototype_design_constraints(proto):
    c = proto.coefficients
    P = proto.freq_samples
    assert c.size == 256
    assert np.max(np.abs(c - c[::-1])) < 1e-12
    assert np.sum(c ** 2) == pytest.approx(1.0, abs=1e-12)
    assert P[1] ** 2 + P[3] ** 2 == pytest.approx(1.0, abs=1e-15)
    assert P[2] == pytest.approx(np.sqrt(2) / 2, abs=1e-15)
    assert P[1] == pytest.approx(0.97195983) and P[3] == pytest.approx(0.23514695, abs=1e-8)


def test_prototype_rejects_unsupported_overlap():
    with pytest.raises(ConfigError):
        oqam.design_prototype(64, 5)


def test_coefficient_dump_roundtrip(proto, tmp_path):
    path = oqam.dump_coefficients(proto, tmp_path / "proto.txt")
    lines = path.read_text().splitlines()
    assert len(lines) == 256
    assert np.array_equal(oqam.load_coefficients(path), proto.coefficients)


def test_zero_grid_zero_stream(proto):
    s = oqam.synthesis(np.zeros((64, 6)), proto)
    assert len(s) == 5 * 32 + 256
    assert not np.any(s.samples)
    assert not np.any(oqam.analysis(s, proto, 6).values)


def test_impulse_gives_prototype(proto):
    a = np.zeros((64, 3))
    a[0, 0] = 1
    s = oqam.synthesis(a, proto).samples
    assert np.allclose(s[:256], proto.coefficients, atol=1e-12)
    assert not np.any(np.abs(s[256:]) > 1e-12)


def test_synthesis_rejects_cp_grid(proto):
    with pytest.raises(ValueError):
        oqam.synthesis(mapping.SymbolGrid(Scheme.CP_OFDM, np.zeros((64, 2))), proto)


def test_analysis_needs_samples(proto):
    with pytest.raises(ValueError):
        oqam.analysis(np.zeros(300), proto, 4)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_polyphase_equals_direct_convolution(seed):
    K = 8
    small = oqam.design_prototype(K, 4)
    a = np.random.default_rng(seed).standard_normal((K, 4))
    s = oqam.synthesis(a, small).samples
    ref = direct_synthesis(a, small.coefficients, K)
    assert np.max(np.abs(s - ref)) < 1e-9
    z = oqam.analysis_complex(s, small, 4)
    assert np.max(np.abs(z - direct_analysis(s, small.coefficients, K, 4))) < 1e-9


def test_back_to_back_sir(proto, rng):
    a = rng.choice([-1.0, 1.0], (64, 80)) / np.sqrt(2)
    rec = oqam.analysis(oqam.synthesis(a, proto), proto, 80).values
    err = (rec - a)[:, 8:-8]  # away from the frame edges
    sir = 10 * np.log10(np.mean(a ** 2) / np.mean(err ** 2))
    assert sir >= 50


def test_steady_state_power_matches_grid_density(proto, rng):
    n = 200
    a = rng.standard_normal((64, n))
    s = oqam.synthesis(a, proto).samples
    mid = s[64 * 8: 64 * (n // 2 - 8)]
    # each real symbol carries unit filter energy and arrives every K/2 samples
    expected = np.mean(a ** 2) * 64 / 32
    assert np.mean(np.abs(mid) ** 2) == pytest.approx(expected, rel=0.05)


def test_single_pilot_recovered(proto):
    a = np.zeros((64, 12))
    a[5, 6] = 1
    z = oqam.analysis(oqam.synthesis(a, proto), proto, 12).values
    assert abs(z[5, 6] - 1) < 1e-3


def test_intrinsic_weights(proto):
    w = oqam.intrinsic_weights(proto)
    assert w.w(0, 0) == pytest.approx(1, abs=1e-12)
    assert abs(w.w(0, 1)) == pytest.approx(0.5644, abs=1e-3)
    assert abs(w.w(1, 0)) == pytest.approx(0.2393, abs=1e-3)
    assert abs(w.w(1, 1)) == pytest.approx(0.2058, abs=1e-3)
    for parity in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        t = w.table(*parity)
        assert np.all(np.abs(t) <= 1 + 1e-12)
        assert np.allclose(np.abs(t), np.abs(t[::-1, ::-1]), atol=1e-12)
        off = t.copy()
        off[1, 3] = 0
        assert np.max(np.abs(off.real)) < 1e-3  # the intrinsic term is imaginary


def test_weight_energy_below_full_response(proto):
    w = oqam.intrinsic_weights(proto)
    a = np.zeros((64, 24))
    a[10, 12] = 1
    full = oqam.analysis_complex(oqam.synthesis(a, proto), proto, 24)
    assert np.sum(np.abs(w.table(10, 12)) ** 2) <= np.sum(np.abs(full) ** 2) + 1e-12


def test_weights_outside_span_are_zero(proto):
    w = oqam.intrinsic_weights(proto)
    assert w.w(0, 4) == 0 and w.w(2, 0) == 0


def _bank(n_symb, rng, M=64):
    bits = rng.integers(0, 2, 48 * n_symb * int(np.log2(M)))
    grid = mapping.allocate_carriers(mapping.qam_map(bits, M), "oqam", n_symb)
    return oqam.bank_grid(grid)


def test_aux_pilots_cancel_interference(proto, aux_weights, rng):
    bank = _bank(30, rng)
    filled = oqam.insert_auxiliary_pilots(bank, aux_weights)
    z = oqam.analysis_complex(oqam.synthesis(filled, proto), proto, filled.n_cols)
    pm = filled.pilot_mask
    rel = np.abs(z[pm] - bank.values[pm]) / np.abs(bank.values[pm])
    assert np.max(rel) < 1e-3
    assert oqam.aux_energy_fraction(filled) >= 0


def test_aux_pilots_zero_neighbourhood(aux_weights):
    n = 4
    vals = np.zeros((64, oqam.CE_SLOTS + 2 * n))
    pm = np.zeros_like(vals, dtype=bool)
    am = np.zeros_like(vals, dtype=bool)
    pm[7, 4] = True
    am[7, 5] = True
    vals[7, 4] = 0.0
    g = mapping.SymbolGrid(Scheme.OQAM_OFDM, vals, pilot_mask=pm, aux_mask=am)
    assert oqam.insert_auxiliary_pilots(g, aux_weights).values[7, 5] == 0


def test_aux_pilot_weight_guard(aux_weights):
    weak = oqam.InterferenceWeights({k: v * 0.1 for k, v in aux_weights.tables.items()},
                                    aux_weights.span_k, aux_weights.span_n)
    g = oqam.bank_grid(mapping.allocate_carriers(np.zeros(48 * 2), "oqam", 2))
    with pytest.raises(ConfigError):
        oqam.insert_auxiliary_pilots(g, weak)


def test_preamble_periodic_and_accounted(proto):
    pre = oqam.build_oqam_preamble(proto)
    s = pre.samples
    lead = pre.markers["sync"]
    bank = pre.markers["bank"]
    assert lead == 127 and bank == 576
    assert not np.any(s[:lead])
    assert np.max(np.abs(s[lead:bank - 64] - s[lead + 64:bank])) < 1e-10
    assert np.mean(np.abs(s[lead:bank]) ** 2) == pytest.approx(52 / 64, rel=0.01)


def test_ce_slot_guarded_by_zeros(rng):
    bank = _bank(3, rng)
    assert np.all(bank.values[:, 1:oqam.CE_SLOTS] == 0)
    ce = bank.values[:, 0]
    used = np.mod(USED_CARRIERS, 64)
    assert np.all(np.abs(ce[used]) == 1)
    assert np.count_nonzero(ce) == 52


def test_pseudo_pilots_bounded_away_from_zero(aux_weights):
    c = oqam.pseudo_pilots(oqam.ce_sequence(), aux_weights)
    assert np.min(np.abs(c[np.mod(USED_CARRIERS, 64)])) > 1.0
