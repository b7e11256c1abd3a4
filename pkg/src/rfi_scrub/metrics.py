"""Image quality measures for interference removal."""
from __future__ import annotations

import math

import numpy as np

from .core import DimensionError, ParameterError, as_image, energy

DB_FLOOR = -300.0


def average_gradient(X) -> float:
    """Mean of ``sqrt((gx**2 + gy**2)/2)`` over the magnitude image.

    ``gx`` and ``gy`` are forward differences along columns and rows, taken
    on the ``(M-1) x (N-1)`` samples where both exist.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 2:
        raise ParameterError(f"average gradient needs an image of at least 2x2, got {X.shape}")
    mag = np.abs(as_image(X))
    gx = mag[:-1, 1:] - mag[:-1, :-1]
    gy = mag[1:, :-1] - mag[:-1, :-1]
    return float(np.mean(np.sqrt(0.5 * (gx * gx + gy * gy))))


def relative_recovery_error(S_hat, S) -> float:
    """``10*log10(||S_hat - S||^2 / ||S||^2)`` in dB, floored at -300 dB."""
    S_hat, S = as_image(S_hat, "S_hat"), as_image(S, "S")
    if S_hat.shape != S.shape:
        raise DimensionError(f"shape mismatch: {S_hat.shape} vs {S.shape}")
    ref = energy(S)
    if ref <= 0:
        raise ParameterError("reference image has zero energy")
    err = energy(S_hat - S)
    if err <= 0:
        return DB_FLOOR
    return max(10.0 * math.log10(err / ref), DB_FLOOR)


def sir_db(S, R) -> float:
    """``10*log10(energy(S)/energy(R))``."""
    es, er = energy(as_image(S, "S")), energy(as_image(R, "R"))
    if es <= 0 or er <= 0:
        raise ParameterError("SIR needs non-zero scene and interference energy")
    return 10.0 * math.log10(es / er)
