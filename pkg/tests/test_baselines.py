import warnings

import numpy as np
import pytest

from rfi_scrub.baselines import (RpcaConfig, RpcaNotConvergedWarning, pca_removal, rpca_decompose,
                                 rpca_removal, rpca_scene)
from rfi_scrub.core import ConfigError, ParameterError
from oracles import crandn


def test_pca_rank_one_is_removed(rng):
    X = np.outer(crandn(rng, 12), crandn(rng, 9))
    S, R = pca_removal(X, 1)
    assert np.linalg.norm(S) <= 1e-10 * np.linalg.norm(X)
    np.testing.assert_allclose(R, X, atol=1e-12)


def test_pca_k_range():
    X = np.eye(6, dtype=complex)
    with pytest.raises(ParameterError):
        pca_removal(X, 0)
    with pytest.raises(ParameterError):
        pca_removal(X, 6)


def test_pca_matches_svd_oracle(rng):
    X = crandn(rng, 10, 7)
    S, R = pca_removal(X, 2)
    s = np.linalg.svd(X, compute_uv=False)
    assert np.linalg.norm(S) ** 2 == pytest.approx(np.sum(s[2:] ** 2), rel=1e-10)
    np.testing.assert_allclose(S + R, X, atol=1e-12)


def test_rpca_recovers_low_rank_plus_spikes():
    rng = np.random.default_rng(0)
    n = 60
    L0 = 50.0 * np.outer(crandn(rng, n), crandn(rng, n)) / n
    S0 = np.zeros((n, n), dtype=complex)
    idx = rng.choice(n * n, size=n * n // 100, replace=False)
    S0.flat[idx] = 5.0 * np.exp(2j * np.pi * rng.random(idx.size))
    res = rpca_decompose(L0 + S0)
    assert res.converged
    assert np.linalg.norm(res.low_rank - L0) <= 1e-3 * np.linalg.norm(L0)
    assert np.linalg.norm(res.sparse - S0) <= 1e-3 * np.linalg.norm(S0)


def test_rpca_zero_input():
    res = rpca_decompose(np.zeros((5, 5)))
    assert not np.any(res.low_rank) and not np.any(res.sparse) and res.converged


def test_rpca_budget_warning_and_best_iterate(rng):
    X = crandn(rng, 20, 20)
    with pytest.warns(RpcaNotConvergedWarning):
        low, sparse = rpca_removal(X, RpcaConfig(max_iters=2))
    assert low.shape == X.shape


def test_rpca_scene_part(rng):
    X = crandn(rng, 16, 16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RpcaNotConvergedWarning)
        s1, r1 = rpca_scene(X, RpcaConfig())
        s2, r2 = rpca_scene(X, RpcaConfig(image_part="low-rank"))
    np.testing.assert_array_equal(s1, r2)
    np.testing.assert_array_equal(r1, s2)


def test_rpca_is_deterministic(rng):
    X = crandn(rng, 16, 16)
    a, b = rpca_decompose(X), rpca_decompose(X)
    np.testing.assert_array_equal(a.sparse, b.sparse)


def test_rpca_config_validation():
    for bad in (dict(lambda_weight=0), dict(tol=0), dict(max_iters=0), dict(image_part="both")):
        with pytest.raises(ConfigError):
            RpcaConfig(**bad)
