import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rfi_scrub.core import DimensionError, ParameterError
from rfi_scrub.metrics import average_gradient, relative_recovery_error, sir_db
from rfi_scrub.simulator import scale_to_sir
from oracles import crandn


def ag_loop(X):
    mag = np.abs(X)
    M, N = mag.shape
    total = 0.0
    for m in range(M - 1):
        for n in range(N - 1):
            gx = mag[m, n + 1] - mag[m, n]
            gy = mag[m + 1, n] - mag[m, n]
            total += math.sqrt((gx * gx + gy * gy) / 2)
    return total / ((M - 1) * (N - 1))


def test_ag_examples():
    assert average_gradient(3 * np.exp(1j * np.arange(20).reshape(4, 5))) == pytest.approx(0.0, abs=1e-15)
    ramp = np.tile(np.arange(6, dtype=float), (5, 1)) * 1j
    assert average_gradient(ramp) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    with pytest.raises(ParameterError):
        average_gradient(np.ones((1, 5)))


def test_ag_matches_loop(rng):
    X = crandn(rng, 9, 7)
    assert average_gradient(X) == pytest.approx(ag_loop(X), rel=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 100))
def test_ag_scales_linearly(seed, c):
    X = crandn(np.random.default_rng(seed), 6, 6)
    assert average_gradient(c * X) == pytest.approx(c * average_gradient(X), rel=1e-10)


def test_rel_err_examples(rng):
    S = crandn(rng, 8, 8)
    assert relative_recovery_error(S, S) == -300.0
    assert relative_recovery_error(np.zeros_like(S), S) == pytest.approx(0.0, abs=1e-12)
    e = crandn(rng, 8, 8)
    e *= math.sqrt(0.01 * np.sum(np.abs(S) ** 2) / np.sum(np.abs(e) ** 2))
    assert relative_recovery_error(S + e, S) == pytest.approx(-20.0, abs=1e-9)
    with pytest.raises(DimensionError):
        relative_recovery_error(S, S[:4])
    with pytest.raises(ParameterError):
        relative_recovery_error(S, np.zeros_like(S))


def test_sir_examples(rng):
    S = crandn(rng, 8, 8)
    R = S[::-1].copy()
    assert sir_db(S, R) == pytest.approx(0.0, abs=1e-12)
    assert sir_db(S, math.sqrt(10) * R) == pytest.approx(sir_db(S, R) - 10, abs=1e-12)
    for t in (-7.5, 0.0, 12.0):
        assert sir_db(S, scale_to_sir(S, crandn(rng, 8, 8), t)) == pytest.approx(t, abs=1e-9)
    with pytest.raises(ParameterError):
        sir_db(S, np.zeros_like(S))
