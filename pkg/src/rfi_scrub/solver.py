"""Complex l1-regularized least squares by accelerated proximal gradient.

Solves ``min_h lam*||h||_1 + 0.5*||y - D h||_2^2`` for a matrix-free
:class:`~rfi_scrub.dictionary.DictionaryOperator` ``D``. Given a matrix
``Y`` with several columns, the same code solves the joint-sparse problem
``min_H lam*sum_k ||H[k, :]||_2 + 0.5*||Y - D H||_F^2``, where ``|h_k|`` is
replaced by the l2 norm of row ``k``. The penalty is set
relative to the data, ``lam = lambda_rel * ||D^H y||_inf``, so that the same
``lambda_rel`` behaves alike on weak and strong signals. The residual norm
attained at the solution is reported as ``delta`` so the equivalent
constrained problem (``||y - D h||^2 <= delta``) can be read back.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DataError, DimensionError, ParameterError


@dataclass(frozen=True)
class SolverConfig:
    lambda_rel: float = 0.1
    max_iters: int = 500
    tol: float = 1e-6
    acceleration: bool = True

    def __post_init__(self):
        if not 0.0 < self.lambda_rel < 1.0:
            raise ParameterError(f"lambda_rel must lie in (0, 1), got {self.lambda_rel}")
        if int(self.max_iters) < 1:
            raise ParameterError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in ("lambda_rel", "max_iters", "tol", "acceleration") if k in d}
        return cls(**known)


@dataclass
class L1Solution:
    coef: np.ndarray
    lam: float
    objective: float
    delta: float
    iterations: int
    converged: bool
    kkt: float
    history: list = field(default_factory=list)  # objective after every iteration


def soft_threshold(z, tau):
    """Complex soft thresholding ``z * max(1 - tau/|z|, 0)``; works on scalars and arrays."""
    if np.any(np.asarray(tau) < 0):
        raise ParameterError("threshold must be non-negative")
    z_arr = np.asarray(z, dtype=np.complex128)
    mag = np.abs(z_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        shrink = np.where(mag > tau, 1.0 - tau / np.where(mag > 0, mag, 1.0), 0.0)
    out = z_arr * shrink
    if np.ndim(z) == 0:
        return complex(out)
    return out


def row_magnitudes(h) -> np.ndarray:
    """``|h_k|`` for a vector, row l2 norms for a matrix."""
    h = np.asarray(h)
    if h.ndim == 1:
        return np.abs(h)
    return np.sqrt(np.sum(h.real ** 2 + h.imag ** 2, axis=1))


def _prox(z, tau):
    if z.ndim == 1:
        return soft_threshold(z, tau)
    mag = row_magnitudes(z)
    return z * soft_threshold(mag, tau).real[:, None] / np.where(mag > 0, mag, 1.0)[:, None]


def objective(h, y, op, lam) -> float:
    r = op.apply(h) - y
    return float(lam * np.sum(row_magnitudes(h)) + 0.5 * np.vdot(r, r).real)


def kkt_residual(h, y, op, lam) -> float:
    """Distance of ``h`` from the optimality conditions of the l1 problem.

    With ``g = D^H (D h - y)``: an active coefficient needs ``g_k = -lam *
    h_k/|h_k|`` (magnitude ``lam`` and opposite phase), an inactive one needs
    ``|g_k| <= lam``. The worst violation over all ``k`` is returned, so the
    value is zero exactly at a minimizer.
    """
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    g = op.adjoint(op.apply(h) - y)
    mag = row_magnitudes(h)
    active = mag > 0
    worst = 0.0
    if np.any(active):
        unit = h[active] / (mag[active] if h.ndim == 1 else mag[active][:, None])
        worst = float(np.max(row_magnitudes(g[active] + lam * unit)))
    if np.any(~active):
        worst = max(worst, float(np.max(np.maximum(row_magnitudes(g[~active]) - lam, 0.0))))
    return worst


def solve_l1(y, op, cfg: SolverConfig | None = None, lam=None, lipschitz=None) -> L1Solution:
    """Minimize ``lam*||h||_1 + 0.5*||y - D h||^2`` starting from ``h = 0``.

    ``lam`` overrides the relative penalty when given. Iteration stops once
    the relative change of ``h`` falls under ``cfg.tol`` and the KKT residual
    is at most ``10*tol*lam``; otherwise the lowest-objective iterate is
    returned with ``converged=False``.
    """
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim not in (1, 2) or y.shape[0] != op.length:
        raise DimensionError(f"signal must have length {op.length}, got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DataError("signal contains NaN or Inf")

    corr = row_magnitudes(op.adjoint(y))
    if lam is None:
        lam = cfg.lambda_rel * float(np.max(corr))
    lam = float(lam)
    if lam < 0:
        raise ParameterError("lam must be non-negative")
    h = np.zeros((op.grid.size,) + y.shape[1:], dtype=np.complex128)
    energy_y = float(np.vdot(y, y).real)
    if float(np.max(corr, initial=0.0)) <= lam:
        return L1Solution(h, lam, 0.5 * energy_y, energy_y, 0, True, 0.0)

    if lipschitz is None:
        # power iteration approaches the top eigenvalue from below
        lipschitz = 1.02 * op.norm_squared(iters=20)
    step = 1.0 / lipschitz

    Dh = np.zeros(y.shape, dtype=np.complex128)
    obj = 0.5 * energy_y
    z, Dz = h, Dh
    t = 1.0
    best = (obj, h, Dh)
    converged = False
    kkt = np.inf
    it = 0
    history = []
    for it in range(1, int(cfg.max_iters) + 1):
        grad = op.adjoint(Dz - y)
        h_new = _prox(z - step * grad, lam * step)
        Dh_new = op.apply(h_new)
        r = Dh_new - y
        obj_new = lam * float(np.sum(row_magnitudes(h_new))) + 0.5 * float(np.vdot(r, r).real)

        if cfg.acceleration and obj_new > obj:
            # adaptive restart: drop momentum and take a plain step from h
            t = 1.0
            grad = op.adjoint(Dh - y)
            h_new = _prox(h - step * grad, lam * step)
            Dh_new = op.apply(h_new)
            r = Dh_new - y
            obj_new = lam * float(np.sum(row_magnitudes(h_new))) + 0.5 * float(np.vdot(r, r).real)

        diff = h_new - h
        change = float(np.linalg.norm(diff)) / max(float(np.linalg.norm(h_new)), np.finfo(float).tiny)
        if cfg.acceleration:
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            beta = (t - 1.0) / t_new
            z = h_new + beta * diff
            Dz = Dh_new + beta * (Dh_new - Dh)
            t = t_new
        else:
            z, Dz = h_new, Dh_new
        h, Dh, obj = h_new, Dh_new, obj_new
        history.append(obj)
        if obj <= best[0]:
            best = (obj, h, Dh)

        if change < cfg.tol:
            kkt = kkt_residual(h, y, op, lam)
            if kkt <= 10.0 * cfg.tol * lam:
                converged = True
                break

    obj, h, Dh = best
    if not converged:
        kkt = kkt_residual(h, y, op, lam)
    r = Dh - y
    return L1Solution(h, lam, obj, float(np.vdot(r, r).real), it, converged, kkt, history)
