import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rfi_scrub.core import DimensionError, ParameterError
from rfi_scrub.dictionary import (DictionaryOperator, ParameterGrid, azimuth_atom, default_grid,
                                  dictionary_adjoint, dictionary_apply, kron_atom, range_atom)
from oracles import atom_loop, crandn, dense_dictionary


def small_grid(sign="azimuth"):
    # 16 samples, 4 x 3 = 12 atoms, frequencies not on FFT bins
    return ParameterGrid(0.1, 1.3, 4, -0.01, 0.01, 3, sign=sign)


def test_azimuth_atom_examples():
    np.testing.assert_array_equal(azimuth_atom(0, 0, 5), np.ones(5))
    assert azimuth_atom(1, 0, 2)[1] == pytest.approx(-1 + 0j, abs=1e-15)
    assert azimuth_atom(0.3, 0.01, 7)[0] == 1 + 0j
    np.testing.assert_allclose(azimuth_atom(0.5, 0.25, 8), atom_loop(0.5, 0.25, 8, -1), atol=1e-12, rtol=0)


def test_range_atom_examples():
    assert range_atom(0.5, 0.25, 3)[2] == pytest.approx(1 + 0j, abs=1e-15)
    np.testing.assert_array_equal(range_atom(0, 0, 4), np.ones(4))
    np.testing.assert_allclose(range_atom(0.37, -0.02, 33), np.conj(azimuth_atom(0.37, -0.02, 33)), atol=1e-15)


def test_atoms_reject_bad_length():
    with pytest.raises(DimensionError):
        azimuth_atom(0, 0, 0)
    with pytest.raises(DimensionError):
        range_atom(0, 0, -3)


def test_atoms_long_index_accuracy():
    L = 20000
    idx = np.array([0, 1, 777, 12345, L - 1])
    a = azimuth_atom(0.123, 3.3e-6, L)
    ref = atom_loop(0.123, 3.3e-6, L, -1)
    np.testing.assert_allclose(a[idx], ref[idx], atol=1e-12, rtol=0)


def test_kron_atom(rng):
    rg = range_atom(0.2, 0.01, 4)
    img = kron_atom(np.ones(3), rg)
    for row in img:
        np.testing.assert_array_equal(row, rg)
    az = azimuth_atom(0.3, -0.02, 3)
    np.testing.assert_allclose(kron_atom(az, rg).ravel(), np.kron(az, rg), atol=0)
    np.testing.assert_allclose(np.abs(kron_atom(az, rg)), 1.0, atol=1e-15)


def test_grid_basics():
    g = ParameterGrid(0.0, 1.0, 5, -0.1, 0.1, 3)
    np.testing.assert_allclose(g.freqs, [0, 0.25, 0.5, 0.75, 1.0])
    assert g.size == 15
    assert g.unravel(7) == (0.5, 0.0)
    single = ParameterGrid(0.3, 0.3, 1, 0.01, 0.01, 1)
    assert single.freqs.tolist() == [0.3] and single.rate_step == 0.0 and single.freq_step == 0.0
    with pytest.raises(ParameterError):
        ParameterGrid(1.0, 0.0, 3, 0, 0, 1)
    with pytest.raises(ParameterError):
        ParameterGrid(0, 1, 0, 0, 0, 1)
    with pytest.raises(ParameterError):
        ParameterGrid(0, 1, 2, 0, 0, 1, sign="diagonal")


def test_default_grid_is_fft_aligned():
    g = default_grid(64)
    assert g.freq_count == 64 and g.rate_count == 65
    assert g.rate_step == pytest.approx(2 / 64 ** 2)
    np.testing.assert_array_equal(g.fft_bins(64), np.arange(64))
    assert small_grid().fft_bins(16) is None


@pytest.mark.parametrize("sign", ["azimuth", "range"])
def test_apply_matches_dense_oracle(rng, sign):
    g = small_grid(sign)
    op = DictionaryOperator(g, 16)
    assert op.mode == "dense"  # off-bin frequencies fall back
    D = dense_dictionary(g, 16)
    h = crandn(rng, 12)
    np.testing.assert_allclose(dictionary_apply(op, h), D @ h, atol=1e-10)
    y = crandn(rng, 16)
    np.testing.assert_allclose(dictionary_adjoint(op, y), D.conj().T @ y, atol=1e-10)


def test_apply_selects_atoms():
    g = small_grid()
    op = DictionaryOperator(g, 16)
    for k in range(g.size):
        e = np.zeros(g.size, dtype=complex)
        e[k] = 1
        np.testing.assert_allclose(op.apply(e), op.atom(k), atol=1e-14)
    np.testing.assert_array_equal(op.apply(np.zeros(g.size)), np.zeros(16))
    np.testing.assert_array_equal(op.adjoint(np.zeros(16)), np.zeros(g.size))
    with pytest.raises(DimensionError):
        op.apply(np.zeros(11))
    with pytest.raises(DimensionError):
        op.adjoint(np.zeros(15))


@pytest.mark.parametrize("sign", ["azimuth", "range"])
def test_dechirp_fft_matches_dense(rng, sign):
    g = ParameterGrid(0.0, 2 * 63 / 64, 64, -0.01, 0.01, 5, sign=sign)
    fast = DictionaryOperator(g, 64, mode="dechirp-fft")
    dense = DictionaryOperator(g, 64, mode="dense")
    assert fast.mode == "dechirp-fft"
    y = crandn(rng, 64)
    assert np.max(np.abs(fast.adjoint(y) - dense.adjoint(y))) < 1e-9
    h = crandn(rng, g.size)
    assert np.max(np.abs(fast.apply(h) - dense.apply(h))) < 1e-9
    Y = crandn(rng, 64, 3)
    np.testing.assert_allclose(fast.adjoint(Y), dense.dense_matrix().conj().T @ Y, atol=1e-9)


def test_dechirp_fft_matches_loop_oracle(rng):
    g = ParameterGrid(2 * 3 / 32, 2 * 10 / 32, 8, -0.004, 0.004, 3, sign="range")
    op = DictionaryOperator(g, 32)
    assert op.mode == "dechirp-fft"
    D = dense_dictionary(g, 32, normalized=True)
    opn = DictionaryOperator(g, 32, normalized=True)
    y = crandn(rng, 32)
    np.testing.assert_allclose(opn.adjoint(y), D.conj().T @ y, atol=1e-10)


def test_self_correlation_peak():
    g = default_grid(32, "azimuth")
    op = DictionaryOperator(g, 32)
    k = 5 * g.freq_count + 11
    c = op.adjoint(op.atom(k))
    assert abs(c[k]) == pytest.approx(32.0, rel=1e-12)
    assert int(np.argmax(np.abs(c))) == k


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["azimuth", "range"]), st.booleans())
def test_adjoint_identity(seed, sign, normalized):
    rng = np.random.default_rng(seed)
    g = default_grid(24, sign) if seed % 2 else small_grid(sign)
    L = 24 if seed % 2 else 16
    op = DictionaryOperator(g, L, normalized=normalized)
    h, y = crandn(rng, g.size), crandn(rng, L)
    lhs = np.vdot(y, op.apply(h))
    rhs = np.vdot(op.adjoint(y), h)
    assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(h) * np.linalg.norm(y) * max(1, np.sqrt(g.size))


def test_normalized_atoms_have_unit_norm():
    op = DictionaryOperator(small_grid(), 16, normalized=True)
    D = op.dense_matrix()
    np.testing.assert_allclose(np.linalg.norm(D, axis=0), 1.0, atol=1e-12)
    raw = DictionaryOperator(small_grid(), 16).dense_matrix()
    np.testing.assert_allclose(np.linalg.norm(raw, axis=0), 4.0, atol=1e-12)


def test_batched_and_looped_paths_agree(rng, monkeypatch):
    import rfi_scrub.dictionary as dmod

    g = default_grid(32, "range")
    op = DictionaryOperator(g, 32, normalized=True)
    Y = crandn(rng, 32, 4)
    H = crandn(rng, g.size, 4)
    batched = op.adjoint(Y), op.apply(H)
    monkeypatch.setattr(dmod, "_BATCH_LIMIT", 0)
    looped = op.adjoint(Y), op.apply(H)
    np.testing.assert_allclose(batched[0], looped[0], atol=1e-10)
    np.testing.assert_allclose(batched[1], looped[1], atol=1e-10)


def test_norm_squared_close_to_spectral_norm():
    op = DictionaryOperator(default_grid(16), 16, normalized=True)
    exact = np.linalg.norm(op.dense_matrix(), 2) ** 2
    est = op.norm_squared(iters=200)
    assert est <= exact * (1 + 1e-9)
    assert est == pytest.approx(exact, rel=1e-3)
