"""Deramp / focus / notch / restore interference removal, per component and per block.

For each estimated range rate the image is deramped with the shared azimuth
rate and that range rate, so the matching interference term collapses to a
2-D tone. A zero-padded DFT focuses the tone into a few bins, bins above a
threshold are zeroed, and the inverse transform plus re-ramp returns to the
image domain. Components are removed one after another, each pass feeding
the next.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import ConfigError, as_image, chirp, energy
from .estimator import EstimationResult, EstimatorConfig, estimate_fm_rates

RULES = ("robust-median", "quantile", "peak-relative")
TAPERS = ("raised-cosine", "none")
MIN_BLOCK = 8


class NotchDegenerateWarning(UserWarning):
    """The notch threshold would mask every bin; the spectrum was left untouched."""


@dataclass(frozen=True)
class NotchConfig:
    rule: str = "peak-relative"
    kappa: float = 10.0
    quantile_q: float = 0.999
    peak_fraction: float = 0.3
    dilation: int = 1
    oversample: int = 1

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError(f"notch.rule must be one of {RULES}, got {self.rule!r}")
        if not self.kappa > 0:
            raise ConfigError("notch.kappa must be positive")
        if self.rule == "robust-median" and self.kappa <= 1:
            warnings.warn("notch.kappa <= 1 masks at least half of every spectrum", UserWarning, stacklevel=3)
        if not 0.0 < self.quantile_q < 1.0:
            raise ConfigError("notch.quantile_q must lie in (0, 1)")
        if not 0.0 < self.peak_fraction < 1.0:
            raise ConfigError("notch.peak_fraction must lie in (0, 1)")
        if int(self.dilation) < 0:
            raise ConfigError("notch.dilation must be >= 0")
        if int(self.oversample) < 1:
            raise ConfigError("notch.oversample must be >= 1")


@dataclass(frozen=True)
class BlockSpec:
    block_rows: int
    block_cols: int
    overlap: int = 32
    taper: str = "raised-cosine"

    def __post_init__(self):
        if self.block_rows < MIN_BLOCK or self.block_cols < MIN_BLOCK:
            raise ConfigError(f"blocks must be at least {MIN_BLOCK}x{MIN_BLOCK}")
        if self.overlap < 0 or 2 * self.overlap >= min(self.block_rows, self.block_cols):
            raise ConfigError("blocks.overlap must be >= 0 and below half the block size")
        if self.taper not in TAPERS:
            raise ConfigError(f"blocks.taper must be one of {TAPERS}")


@dataclass
class ComponentReport:
    azimuth_fm_rate: float
    range_fm_rate: float
    mask_bins: int
    removed_energy: float
    masked_energy: float
    degenerate: bool = False

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SuppressionReport:
    input_energy: float
    output_energy: float
    components: list = field(default_factory=list)
    estimation: EstimationResult | None = None

    @property
    def removed_energy(self):
        return self.input_energy - self.output_energy

    @property
    def status(self):
        if self.estimation is None or not self.estimation.detected:
            return "no-interference"
        return "ok"

    def to_dict(self):
        return {
            "schema": "rfi-scrub/suppress/1",
            "status": self.status,
            "input_energy": self.input_energy,
            "output_energy": self.output_energy,
            "removed_energy": self.removed_energy,
            "components": [c.to_dict() for c in self.components],
            "estimation": None if self.estimation is None else self.estimation.to_dict(),
        }


def _ramp(shape, azimuth_rate, range_rate, sign):
    az = chirp(0.0, azimuth_rate, shape[0], sign=sign)
    rg = chirp(0.0, range_rate, shape[1], sign=-sign)
    return np.outer(az, rg)


def deramp(X, azimuth_rate, range_rate) -> np.ndarray:
    """``X[m, n] * exp(1j*pi*Ka*m**2) * exp(-1j*pi*Kr*n**2)``."""
    X = as_image(X)
    return X * _ramp(X.shape, azimuth_rate, range_rate, +1)


def reramp(X, azimuth_rate, range_rate) -> np.ndarray:
    """Inverse of :func:`deramp`: multiplies by the conjugate ramp."""
    X = as_image(X)
    return X * np.conj(_ramp(X.shape, azimuth_rate, range_rate, +1))


def spectrum_2d(X, oversample=2) -> np.ndarray:
    """Unnormalized 2-D DFT of ``X`` zero-padded by ``oversample`` along both axes."""
    X = as_image(X)
    if int(oversample) < 1:
        raise ConfigError("oversample must be >= 1")
    M, N = X.shape
    return np.fft.fft2(X, s=(int(oversample) * M, int(oversample) * N))


def inverse_spectrum_2d(F, shape) -> np.ndarray:
    """Inverse of :func:`spectrum_2d`, cropped back to ``shape``."""
    return np.fft.ifft2(F)[:shape[0], :shape[1]]


class NotchResult(NamedTuple):
    spectrum: np.ndarray
    mask: np.ndarray
    threshold: float
    degenerate: bool


def notch_threshold(magnitude, cfg: NotchConfig) -> float:
    if cfg.rule == "robust-median":
        return float(cfg.kappa * np.median(magnitude))
    if cfg.rule == "peak-relative":
        return float(max(cfg.kappa * np.median(magnitude), cfg.peak_fraction * np.max(magnitude)))
    return float(np.quantile(magnitude, cfg.quantile_q))


def dilate_periodic(mask, steps):
    """Grow ``mask`` by ``steps`` bins in all 8 directions, wrapping at the edges."""
    out = mask.copy()
    for _ in range(int(steps)):
        grown = out.copy()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr or dc:
                    grown |= np.roll(out, (dr, dc), axis=(0, 1))
        out = grown
    return out


def notch_filter(F, cfg: NotchConfig | None = None) -> NotchResult:
    """Zero the bins of ``F`` whose magnitude exceeds the configured threshold.

    A non-positive threshold, or a threshold that every bin exceeds, is
    refused: the spectrum comes back unchanged with an empty mask, ``degenerate=True`` and
    a :class:`NotchDegenerateWarning`.
    """
    cfg = cfg or NotchConfig()
    F = np.asarray(F, dtype=np.complex128)
    mag = np.abs(F)
    T = notch_threshold(mag, cfg)
    mask = mag > T
    if T <= 0 or mask.all():
        warnings.warn("notch threshold would mask the whole spectrum; left unchanged",
                      NotchDegenerateWarning, stacklevel=2)
        return NotchResult(F, np.zeros(F.shape, dtype=bool), T, True)
    if cfg.dilation and mask.any():
        mask = dilate_periodic(mask, cfg.dilation)
    clean = F.copy()
    clean[mask] = 0
    return NotchResult(clean, mask, T, False)


def suppress_component(X, azimuth_rate, range_rate, cfg: NotchConfig | None = None):
    """Remove the interference term focused by ``(azimuth_rate, range_rate)``.

    Returns ``(X_clean, ComponentReport)``. When the notch is empty or
    refused, ``X_clean`` is ``X`` itself, bit for bit.
    """
    cfg = cfg or NotchConfig()
    X = as_image(X)
    F = spectrum_2d(deramp(X, azimuth_rate, range_rate), cfg.oversample)
    notch = notch_filter(F, cfg)
    n_bins = int(notch.mask.sum())
    if n_bins == 0:
        return X, ComponentReport(azimuth_rate, range_rate, 0, 0.0, 0.0, notch.degenerate)
    masked = float(np.sum(np.abs(F[notch.mask]) ** 2)) / F.size
    out = reramp(inverse_spectrum_2d(notch.spectrum, X.shape), azimuth_rate, range_rate)
    return out, ComponentReport(azimuth_rate, range_rate, n_bins, energy(X) - energy(out), masked)


def remove_components(X, estimation: EstimationResult, notch_cfg: NotchConfig | None = None, l_max=None):
    """Notch the first ``l_max`` estimated range components of ``X`` in weight order.

    Every pass deramps with the shared azimuth rate and that component's range
    rate, and feeds its output to the next pass. Returns ``(S_hat, report)``.
    """
    notch_cfg = notch_cfg or NotchConfig()
    X = as_image(X)
    report = SuppressionReport(energy(X), energy(X), estimation=estimation)
    out = X
    if estimation.detected:
        comps = estimation.range_components
        for comp in comps[:len(comps) if l_max is None else int(l_max)]:
            out, comp_report = suppress_component(out, estimation.azimuth_fm_rate, comp.rate, notch_cfg)
            report.components.append(comp_report)
        report.output_energy = energy(out)
    return out, report


def suppress_rfi(X, est_cfg: EstimatorConfig | None = None, notch_cfg: NotchConfig | None = None):
    """Estimate FM rates once, then notch every range component in weight order.

    Returns ``(S_hat, R_hat, report)`` with ``R_hat = X - S_hat``. Without
    detected interference ``S_hat`` is ``X`` unchanged.
    """
    est_cfg = est_cfg or EstimatorConfig()
    X = as_image(X)
    out, report = remove_components(X, estimate_fm_rates(X, est_cfg), notch_cfg)
    return out, X - out, report


def _cores(size, block):
    starts = list(range(0, size, block))
    if len(starts) > 1 and size - starts[-1] < MIN_BLOCK:
        starts.pop()  # fold a sliver into its neighbour
    ends = starts[1:] + [size]
    return list(zip(starts, ends))


def _axis_weights(cores, size, overlap, taper):
    """Per-block 1-D weights over the extended extents; they sum to one at every sample."""
    spans, weights = [], []
    x = np.arange(size)
    for i, (s, e) in enumerate(cores):
        lo = s - overlap if i > 0 else s
        hi = e + overlap if i < len(cores) - 1 else e
        w = np.ones(hi - lo)
        if overlap and taper == "raised-cosine":
            xs = x[lo:hi] + 0.5
            if i > 0:
                t = np.clip((xs - (s - overlap)) / (2 * overlap), 0.0, 1.0)
                w *= 0.5 * (1.0 - np.cos(np.pi * t))
            if i < len(cores) - 1:
                t = np.clip((xs - (e - overlap)) / (2 * overlap), 0.0, 1.0)
                w *= 0.5 * (1.0 + np.cos(np.pi * t))
        spans.append((lo, hi))
        weights.append(w)
    total = np.zeros(size)
    for (lo, hi), w in zip(spans, weights):
        total[lo:hi] += w
    return spans, [w / total[lo:hi] for (lo, hi), w in zip(spans, weights)]


@dataclass
class BlockReport:
    row0: int
    col0: int
    rows: int
    cols: int
    report: SuppressionReport

    def to_dict(self):
        return {"row0": self.row0, "col0": self.col0, "rows": self.rows, "cols": self.cols,
                **self.report.to_dict()}


@dataclass
class BlockwiseReport:
    input_energy: float
    output_energy: float
    blocks: list = field(default_factory=list)

    @property
    def removed_energy(self):
        return self.input_energy - self.output_energy

    def to_dict(self):
        return {"schema": "rfi-scrub/blocks/1", "input_energy": self.input_energy,
                "output_energy": self.output_energy, "removed_energy": self.removed_energy,
                "blocks": [b.to_dict() for b in self.blocks]}


def default_workers():
    try:
        return max(1, int(os.environ.get("RFI_SCRUB_THREADS", "1")))
    except ValueError:
        return 1


def process_blocks(X, spec: BlockSpec, est_cfg: EstimatorConfig | None = None,
                   notch_cfg: NotchConfig | None = None, workers=None, order=None):
    """Run :func:`suppress_rfi` on overlapping blocks and blend the results.

    Blocks are independent. Overlaps are blended with weights that sum to
    one; samples no block changed keep their input value exactly. ``order``
    permutes the processing schedule (for testing) and never affects the
    result, since blending always runs in block-index order.
    """
    X = as_image(X)
    row_spans, row_w = _axis_weights(_cores(X.shape[0], spec.block_rows), X.shape[0], spec.overlap, spec.taper)
    col_spans, col_w = _axis_weights(_cores(X.shape[1], spec.block_cols), X.shape[1], spec.overlap, spec.taper)
    jobs = [(i, j) for i in range(len(row_spans)) for j in range(len(col_spans))]
    for i, j in jobs:
        (r0, r1), (c0, c1) = row_spans[i], col_spans[j]
        if r1 - r0 < MIN_BLOCK or c1 - c0 < MIN_BLOCK:
            raise ConfigError(f"block at ({r0}, {c0}) is smaller than {MIN_BLOCK}x{MIN_BLOCK}")
    schedule = list(order) if order is not None else jobs

    def run(job):
        i, j = job
        (r0, r1), (c0, c1) = row_spans[i], col_spans[j]
        out, _, rep = suppress_rfi(X[r0:r1, c0:c1], est_cfg, notch_cfg)
        return job, out, rep

    workers = default_workers() if workers is None else int(workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict((job, (out, rep)) for job, out, rep in pool.map(run, schedule))
    else:
        results = {job: (out, rep) for job, out, rep in map(run, schedule)}

    acc = np.zeros_like(X)
    changed = np.zeros(X.shape, dtype=bool)
    report = BlockwiseReport(energy(X), 0.0)
    for i, j in jobs:
        (r0, r1), (c0, c1) = row_spans[i], col_spans[j]
        out, rep = results[(i, j)]
        acc[r0:r1, c0:c1] += np.outer(row_w[i], col_w[j]) * out
        changed[r0:r1, c0:c1] |= out != X[r0:r1, c0:c1]
        report.blocks.append(BlockReport(r0, c0, r1 - r0, c1 - c0, rep))
    result = np.where(changed, acc, X)
    report.output_energy = energy(result)
    return result, report
