"""Decoupled azimuth / range FM-rate estimation over chirp dictionaries.

The azimuth rate is shared by every interference component, so it is read
from the single strongest azimuth atom. Range rates differ per component;
they come from clusters of significant range-atom coefficients.

Two modes are available:

``"paper-exact"``
    One coefficient vector explains every column (or row). Because
    ``sum_i ||X[:, i] - D h||^2 = N ||mean_col - D h||^2 + const``, this is an
    l1 problem on the mean column, solved with :func:`solve_l1`.

``"mmv"``
    Every line is treated as a separate measurement of the same sparse
    support, so components whose phase changes from line to line do not
    cancel as they do in the mean. In azimuth the interference occupies a
    single atom, which is the argmax of the per-line correlation power
    aggregated over lines. In range the lines are first compressed onto their
    ``mmv_rank`` principal directions, then a joint-sparse (row l2,1) fit over
    the range dictionary separates components whose correlation ridges
    overlap.

Both modes first run a noise-only significance test on the correlation
statistic; when nothing clears it, the result carries the
``"no-interference"`` status and no components.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, stats

from .core import ConfigError, ParameterError, as_image
from .dictionary import AZIMUTH, RANGE, DictionaryOperator, ParameterGrid, default_grid
from .solver import SolverConfig, row_magnitudes, solve_l1

OK = "ok"
NO_INTERFERENCE = "no-interference"
MODES = ("mmv", "paper-exact")


@dataclass(frozen=True)
class RangeComponent:
    rate: float
    freq: float
    weight: float


@dataclass
class EstimationResult:
    status: str
    azimuth_fm_rate: float | None = None
    azimuth_freq: float | None = None
    range_components: list = field(default_factory=list)
    mode: str = "mmv"

    @property
    def detected(self):
        return self.status == OK and bool(self.range_components)

    def to_dict(self):
        return {
            "schema": "rfi-scrub/estimate/1",
            "status": self.status,
            "mode": self.mode,
            "azimuth_fm_rate": self.azimuth_fm_rate,
            "azimuth_freq": self.azimuth_freq,
            "range_components": [
                {"range_fm_rate": c.rate, "range_freq": c.freq, "weight": c.weight}
                for c in self.range_components],
        }


@dataclass(frozen=True)
class EstimatorConfig:
    mode: str = "mmv"
    l_max: int = 5
    rel_weight_floor: float = 0.1
    roi: tuple | None = None
    detect_pfa: float | None = 1e-3
    mmv_rank: int = 8
    solver: SolverConfig = field(default_factory=SolverConfig)
    azimuth_grid: ParameterGrid | None = None
    range_grid: ParameterGrid | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"estimator.mode must be one of {MODES}, got {self.mode!r}")
        if int(self.l_max) < 1:
            raise ConfigError("estimator.l_max must be >= 1")
        if not 0.0 < self.rel_weight_floor <= 1.0:
            raise ConfigError("estimator.rel_weight_floor must lie in (0, 1]")
        if self.roi is not None and len(self.roi) != 4:
            raise ConfigError("estimator.roi must be [row0, col0, rows, cols]")
        if self.detect_pfa is not None and not 0.0 < self.detect_pfa < 1.0:
            raise ConfigError("estimator.detect_pfa must lie in (0, 1) or be null")

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


def mean_column_reduction(X, axis=AZIMUTH):
    """Mean column (``axis="azimuth"``) or mean row (``axis="range"``) and the line count.

    For any dictionary ``D`` and coefficients ``h``::

        sum_i ||X_i - D h||^2 == count * ||mean - D h||^2 + sum_i ||X_i||^2 - count * ||mean||^2
    """
    X = as_image(X)
    if axis == AZIMUTH:
        return X.mean(axis=1), X.shape[1]
    if axis == RANGE:
        return X.mean(axis=0), X.shape[0]
    raise ParameterError(f"axis must be 'azimuth' or 'range', got {axis!r}")


def _lines(X, axis):
    # columns of the returned matrix are the signals seen by the axis dictionary
    return X if axis == AZIMUTH else X.T


def aggregated_power(X, op: DictionaryOperator) -> np.ndarray:
    """Mean over lines of squared correlations with each normalized atom, shape ``(rate, freq)``."""
    Y = _lines(X, op.grid.sign)
    out = np.empty((op.grid.rate_count, op.grid.freq_count))
    for r in range(op.grid.rate_count):
        c = op.adjoint_rate(Y, r)
        out[r] = np.mean(c.real ** 2 + c.imag ** 2, axis=1)
    return out


def noise_threshold(power, n_lines, n_atoms, pfa) -> float:
    """Power level that noise alone exceeds with probability ``pfa`` anywhere on the grid.

    Under white noise each aggregated power is ``sigma^2 * Gamma(n, 1/n)``;
    ``sigma^2`` is recovered from the median of ``power``.
    """
    dist = stats.gamma(a=n_lines, scale=1.0 / n_lines)
    sigma2 = float(np.median(power)) / dist.median()
    return sigma2 * float(dist.isf(pfa / n_atoms))


def principal_lines(Y, rank):
    """``U_r * s_r``: the ``rank`` dominant left singular directions of ``Y`` scaled by their singular values.

    Joint-sparse fits against these columns have the same row support as fits
    against all of ``Y`` whenever the rest of ``Y`` is noise.
    """
    if Y.shape[1] <= rank:
        return Y
    U, s, _ = np.linalg.svd(Y, full_matrices=False)
    return U[:, :rank] * s[:rank]


def _axis_operator(grid, length, normalized=True):
    return DictionaryOperator(grid, length, mode="dechirp-fft", normalized=normalized)


def axis_coefficients(X, grid: ParameterGrid, cfg: EstimatorConfig):
    """Coefficient magnitudes over ``grid`` (shape ``(rate, freq)``), or ``None`` if nothing is detected."""
    axis = grid.sign
    length = X.shape[0] if axis == AZIMUTH else X.shape[1]
    op = _axis_operator(grid, length)
    if cfg.mode == "mmv":
        Y = _lines(X, axis)
        power = aggregated_power(X, op)
        if not np.any(power > 0):
            return None
        if cfg.detect_pfa is not None and power.max() <= noise_threshold(power, Y.shape[1], grid.size, cfg.detect_pfa):
            return None
        if axis == AZIMUTH:
            return np.sqrt(power)
        sol = solve_l1(principal_lines(Y, cfg.mmv_rank), op, cfg.solver)
        mags = row_magnitudes(sol.coef)
        if not np.any(mags > 0):
            return None
        return mags.reshape(grid.rate_count, grid.freq_count)

    y, _ = mean_column_reduction(X, axis)
    corr = op.adjoint(y)
    power = np.abs(corr) ** 2
    if not np.any(power > 0):
        return None
    if cfg.detect_pfa is not None and power.max() <= noise_threshold(power, 1, grid.size, cfg.detect_pfa):
        return None
    sol = solve_l1(y, op, cfg.solver)
    mags = np.abs(sol.coef)
    if not np.any(mags > 0):
        return None
    return mags.reshape(grid.rate_count, grid.freq_count)


def estimate_azimuth_fm(X, grid: ParameterGrid | None = None, cfg: EstimatorConfig | None = None):
    """Return ``(rate, freq, coefficients)`` of the strongest azimuth atom, or ``None``.

    Ties resolve to the lowest flat grid index.
    """
    X = as_image(X)
    cfg = cfg or EstimatorConfig()
    grid = grid or default_grid(X.shape[0], AZIMUTH)
    if grid.sign != AZIMUTH:
        raise ParameterError("azimuth estimation needs an azimuth grid")
    coef = axis_coefficients(X, grid, cfg)
    if coef is None:
        return None
    k = int(np.argmax(coef))  # first maximum = lowest flat index
    freq, rate = grid.unravel(k)
    return rate, freq, coef


def _circular_freq(grid: ParameterGrid, length):
    bins = grid.fft_bins(length)
    return bins is not None and grid.freq_count == length


def cluster_peaks(coefficients, grid: ParameterGrid, rel_weight_floor=0.1, l_max=5,
                  circular_freq=False):
    """Group non-zero coefficients into 8-connected clusters on the (rate, freq) lattice.

    Each cluster reports the magnitude-weighted centroid snapped to the nearest
    grid point (halves go to the lower index) and its l2 mass as weight.
    Clusters lighter than ``rel_weight_floor`` times the heaviest are dropped,
    and at most ``l_max`` are kept, heaviest first. With ``circular_freq`` the
    frequency axis wraps around.
    """
    if not 0.0 <= rel_weight_floor <= 1.0:
        raise ParameterError("rel_weight_floor must lie in [0, 1]")
    mags = np.abs(np.asarray(coefficients)).reshape(grid.rate_count, grid.freq_count)
    support = mags > 0
    if not support.any():
        return []
    labels, count = ndimage.label(support, structure=np.ones((3, 3), dtype=bool))
    if circular_freq and grid.freq_count > 2:
        labels, count = _merge_wrapped(labels, count)
    F = grid.freq_count
    rates, freqs = grid.rates, grid.freqs
    found = []
    for lab in range(1, count + 1):
        r_idx, f_idx = np.nonzero(labels == lab)
        if r_idx.size == 0:
            continue
        w = mags[r_idx, f_idx]
        top = int(np.argmax(w))
        df = f_idx - f_idx[top]
        if circular_freq:
            df = (df + F // 2) % F - F // 2
        r_c = np.sum(w * r_idx) / np.sum(w)
        f_c = f_idx[top] + np.sum(w * df) / np.sum(w)
        r_snap = int(np.clip(np.ceil(r_c - 0.5), 0, grid.rate_count - 1))
        f_snap = int(np.ceil(f_c - 0.5))
        f_snap = f_snap % F if circular_freq else int(np.clip(f_snap, 0, F - 1))
        weight = float(np.sqrt(np.sum(w * w)))
        found.append((weight, r_snap * F + f_snap, RangeComponent(float(rates[r_snap]), float(freqs[f_snap]), weight)))
    found.sort(key=lambda t: (-t[0], t[1]))
    top_weight = found[0][0]
    kept = [c for wt, _, c in found if wt >= rel_weight_floor * top_weight]
    return kept[:int(l_max)]


def _merge_wrapped(labels, count):
    """Join clusters touching across the frequency wrap (8-adjacency)."""
    parent = list(range(count + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    first, last = labels[:, 0], labels[:, -1]
    R = labels.shape[0]
    for r in range(R):
        if first[r] == 0:
            continue
        for dr in (-1, 0, 1):
            rr = r + dr
            if 0 <= rr < R and last[rr]:
                a, b = find(first[r]), find(last[rr])
                if a != b:
                    parent[max(a, b)] = min(a, b)
    roots = np.array([find(i) for i in range(count + 1)])
    return roots[labels], count


def estimate_range_fm(X, grid: ParameterGrid | None = None, cfg: EstimatorConfig | None = None,
                      l_max=None, rel_weight_floor=None):
    """Range components (heaviest first); empty when nothing is detected."""
    X = as_image(X)
    cfg = cfg or EstimatorConfig()
    grid = grid or default_grid(X.shape[1], RANGE)
    if grid.sign != RANGE:
        raise ParameterError("range estimation needs a range grid")
    l_max = cfg.l_max if l_max is None else l_max
    rho = cfg.rel_weight_floor if rel_weight_floor is None else rel_weight_floor
    if int(l_max) < 1:
        raise ParameterError("l_max must be >= 1")
    coef = axis_coefficients(X, grid, cfg)
    if coef is None:
        return []
    return cluster_peaks(coef, grid, rho, l_max, circular_freq=_circular_freq(grid, X.shape[1]))


def crop_roi(X, roi):
    if roi is None:
        return X
    r0, c0, nr, nc = (int(v) for v in roi)
    if r0 < 0 or c0 < 0 or nr < 1 or nc < 1 or r0 + nr > X.shape[0] or c0 + nc > X.shape[1]:
        raise ConfigError(f"roi {list(roi)} does not fit a {X.shape[0]}x{X.shape[1]} image")
    return X[r0:r0 + nr, c0:c0 + nc]


def estimate_fm_rates(X, cfg: EstimatorConfig | None = None) -> EstimationResult:
    """Azimuth rate plus range components of the interference in ``X``."""
    cfg = cfg or EstimatorConfig()
    X = crop_roi(as_image(X), cfg.roi)
    az = estimate_azimuth_fm(X, cfg.azimuth_grid, cfg)
    if az is None:
        return EstimationResult(NO_INTERFERENCE, mode=cfg.mode)
    comps = estimate_range_fm(X, cfg.range_grid, cfg)
    if not comps:
        return EstimationResult(NO_INTERFERENCE, mode=cfg.mode)
    return EstimationResult(OK, az[0], az[1], comps, cfg.mode)
