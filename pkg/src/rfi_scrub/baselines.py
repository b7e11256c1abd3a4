"""Low-rank interference removal baselines: truncated-SVD PCA and robust PCA.

Strip-like interference in a focused image is close to low rank, so both
methods model it as the low-rank part of the image. PCA removes the top
singular directions outright. Robust PCA (principal component pursuit)
splits the image into a low-rank part and an entrywise-sparse part and keeps
the sparse part as the scene by default.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import ConfigError, ParameterError, as_image
from .solver import soft_threshold

IMAGE_PARTS = ("sparse", "low-rank")


class RpcaNotConvergedWarning(UserWarning):
    """Robust PCA hit its iteration cap; the best iterate was returned."""


def pca_removal(X, k=1):
    """Subtract the best rank-``k`` approximation of ``X``.

    Returns ``(S_hat, R_hat)`` with ``R_hat`` the rank-``k`` truncated SVD of
    ``X`` and ``S_hat = X - R_hat``.
    """
    X = as_image(X)
    k = int(k)
    if not 1 <= k < min(X.shape):
        raise ParameterError(f"k must satisfy 1 <= k < {min(X.shape)}, got {k}")
    U, s, Vh = np.linalg.svd(X, full_matrices=False)
    R = (U[:, :k] * s[:k]) @ Vh[:k]
    return X - R, R


@dataclass(frozen=True)
class RpcaConfig:
    lambda_weight: float | None = None  # None -> 1/sqrt(max(M, N))
    tol: float = 1e-7
    max_iters: int = 500
    image_part: str = "sparse"

    def __post_init__(self):
        if self.lambda_weight is not None and not self.lambda_weight > 0:
            raise ConfigError("rpca lambda_weight must be positive")
        if not self.tol > 0:
            raise ConfigError("rpca tol must be positive")
        if int(self.max_iters) < 1:
            raise ConfigError("rpca max_iters must be >= 1")
        if self.image_part not in IMAGE_PARTS:
            raise ConfigError(f"rpca image_part must be one of {IMAGE_PARTS}")


class RpcaResult(NamedTuple):
    low_rank: np.ndarray
    sparse: np.ndarray
    converged: bool
    iterations: int
    residual: float


def _svt(Z, tau):
    U, s, Vh = np.linalg.svd(Z, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    r = int(np.count_nonzero(s))
    return (U[:, :r] * s[:r]) @ Vh[:r]


def rpca_decompose(X, cfg: RpcaConfig | None = None) -> RpcaResult:
    """Principal component pursuit by the inexact augmented Lagrangian method.

    Minimizes ``||L||_* + lam*||S||_1`` subject to ``L + S = X``, alternating
    singular-value thresholding for ``L`` with entrywise complex soft
    thresholding for ``S``. All variables start at zero and the penalty
    schedule is fixed, so the result is deterministic.
    """
    cfg = cfg or RpcaConfig()
    X = as_image(X)
    L = np.zeros_like(X)
    S = np.zeros_like(X)
    norm_x = float(np.linalg.norm(X))
    if norm_x == 0.0:
        return RpcaResult(L, S, True, 0, 0.0)
    lam = cfg.lambda_weight or 1.0 / math.sqrt(max(X.shape))
    spec = float(np.linalg.norm(X, 2))
    mu, mu_max, rho = 1.25 / spec, 1.25e7 / spec, 1.5
    Y = np.zeros_like(X)
    best = (np.inf, L, S)
    it = 0
    for it in range(1, int(cfg.max_iters) + 1):
        L = _svt(X - S + Y / mu, 1.0 / mu)
        S = soft_threshold(X - L + Y / mu, lam / mu)
        Z = X - L - S
        res = float(np.linalg.norm(Z)) / norm_x
        if res < best[0]:
            best = (res, L, S)
        if res <= cfg.tol:
            return RpcaResult(L, S, True, it, res)
        Y = Y + mu * Z
        mu = min(mu * rho, mu_max)
    res, L, S = best
    return RpcaResult(L, S, False, it, res)


def rpca_removal(X, cfg: RpcaConfig | None = None):
    """``(low_rank, sparse)`` parts of ``X``; warns when the solver did not converge."""
    out = rpca_decompose(X, cfg)
    if not out.converged:
        warnings.warn(f"robust PCA stopped after {out.iterations} iterations "
                      f"(residual {out.residual:.2e})", RpcaNotConvergedWarning, stacklevel=2)
    return out.low_rank, out.sparse


def rpca_scene(X, cfg: RpcaConfig | None = None):
    """``(S_hat, R_hat)`` with the scene taken from the part named by ``cfg.image_part``."""
    cfg = cfg or RpcaConfig()
    low, sparse = rpca_removal(X, cfg)
    if cfg.image_part == "sparse":
        return sparse, low
    return low, sparse
