"""Synthetic scenes, LFM interference and SIR-controlled corruption.

Interference is evaluated directly in the image domain from the separable
2-D LFM model, with a half-open rectangular window ``[center - T/2, center +
T/2)`` on each axis. All quantities are in samples; there are no physical
units.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (ConfigError, LfmComponent, LfmMixture, ParameterError, as_image, as_mixture,
                   energy)


class WindowClippedWarning(UserWarning):
    """An interference window reaches outside the image and was clipped."""


def _window(center, duration, size, what):
    lo = center - duration / 2.0
    hi = center + duration / 2.0
    if lo < 0 or hi > size:
        warnings.warn(f"{what} window [{lo}, {hi}) exceeds [0, {size}); clipped",
                      WindowClippedWarning, stacklevel=3)
    idx = np.arange(size, dtype=np.float64)
    return (idx >= lo) & (idx < hi)


def component_factors(comp: LfmComponent, rows, cols):
    """Azimuth and range factors whose outer product is the component (amplitude excluded)."""
    comp.check_fits(rows, cols)
    m = np.arange(rows, dtype=np.float64) - comp.azimuth_center
    n = np.arange(cols, dtype=np.float64) - comp.range_center
    az_phase = np.mod(comp.azimuth_fm_rate * m * m, 2.0)
    rg_phase = np.mod(np.mod(comp.range_fm_rate * n * n, 2.0) + np.mod(2.0 * comp.carrier_freq * n, 2.0), 2.0)
    az = np.exp(-1j * np.pi * az_phase) * _window(comp.azimuth_center, comp.azimuth_duration, rows, "azimuth")
    rg = np.exp(1j * np.pi * rg_phase) * _window(comp.range_center, comp.range_duration, cols, "range")
    return az, rg


def generate_lfm_mixture(mixture, rows, cols) -> np.ndarray:
    """Sum of separable windowed 2-D chirps on a ``rows x cols`` grid."""
    mixture = as_mixture(mixture)
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1:
        raise ParameterError("image dimensions must be positive")
    out = np.zeros((rows, cols), dtype=np.complex128)
    for comp in mixture:
        az, rg = component_factors(comp, rows, cols)
        out += comp.amplitude * np.outer(az, rg)
    return out


def scale_to_sir(S, R, sir_db) -> np.ndarray:
    """Scale ``R`` so that ``10*log10(energy(S)/energy(scaled R)) == sir_db``."""
    es, er = energy(S), energy(R)
    if es <= 0 or er <= 0:
        raise ParameterError("scale_to_sir needs non-zero scene and interference energy")
    c = math.sqrt(es / (er * 10.0 ** (sir_db / 10.0)))
    return c * np.asarray(R, dtype=np.complex128)


def complex_gaussian(rng, shape, power=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with ``E|x|^2 = power``."""
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def add_noise(X, snr_db, seed) -> np.ndarray:
    X = as_image(X)
    if not np.isfinite(snr_db):
        raise ParameterError("snr_db must be finite")
    var = energy(X) / (X.size * 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    return X + complex_gaussian(rng, X.shape, var)


def _sinc_kernel(half_width=4, bandwidth=0.8):
    t = np.arange(-half_width, half_width + 1)
    k = np.sinc(bandwidth * t)
    return np.outer(k, k)


def make_scene(scene, rows, cols, seed) -> np.ndarray:
    """Synthetic clean scene described by a ``scene`` mapping.

    ``{"type": "speckle", "mean_power": p}`` draws a complex Gaussian field.
    ``{"type": "point-targets", "count": n, "amplitude_range": [lo, hi]}``
    places ``n`` random complex impulses and smears each by a small 2-D sinc.
    ``{"type": "from-file", "path": ...}`` loads a CIMG file.
    """
    scene = dict(scene or {"type": "speckle"})
    kind = scene.get("type", "speckle")
    rng = np.random.default_rng(seed)
    if kind == "speckle":
        return complex_gaussian(rng, (rows, cols), float(scene.get("mean_power", 1.0)))
    if kind == "point-targets":
        from scipy.signal import fftconvolve

        count = int(scene.get("count", 10))
        lo, hi = scene.get("amplitude_range", [1.0, 10.0])
        impulses = np.zeros((rows, cols), dtype=np.complex128)
        flat = rng.choice(rows * cols, size=count, replace=False)
        mags = rng.uniform(lo, hi, size=count)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=count)
        impulses.flat[flat] = mags * np.exp(1j * phases)
        return fftconvolve(impulses, _sinc_kernel(), mode="same")
    if kind == "from-file":
        from .image_io import read_cimg

        img = read_cimg(scene["path"])
        if img.shape != (rows, cols):
            raise ConfigError(f"scene file is {img.shape}, simulation wants {(rows, cols)}")
        return img
    raise ConfigError(f"unknown scene type {kind!r}")


def _on_grid_centers(size, rate_index, duration=None):
    """Window centers at which a grid-rate chirp keeps a grid frequency.

    A chirp of rate ``2*j/size**2`` centered at ``c`` has linear coefficient
    ``-4*j*c/size**2``, which lies on the FFT grid iff ``2*j*c/size`` is an
    integer. With a ``duration`` the window must also fit inside the image.
    """
    step = size // math.gcd(2 * abs(rate_index), size) if rate_index else 1
    cands = list(range(0, size, step))
    if duration is not None:
        cands = [c for c in cands if duration / 2.0 <= c <= size - duration / 2.0]
    return cands or [size // 2]


def _pick_centers(rng, cands, count):
    # distinct centers where possible, so components differ by more than a scale
    if len(cands) >= count:
        return [float(c) for c in rng.choice(cands, size=count, replace=False)]
    perm = rng.permutation(cands)
    return [float(perm[i % len(perm)]) for i in range(count)]


def random_lfm_mixture(rows, cols, rng, weights=(1.0, 0.8, 0.5), min_rate_gap=None,
                       azimuth_extent=None, range_extent=None) -> LfmMixture:
    """Random mixture whose rates and atom frequencies lie on the default grids.

    Shared azimuth rate ``2*ja/rows**2`` and per-component range rates
    ``2*jr/cols**2`` are integer grid steps; the range rates are at least
    ``min_rate_gap`` steps apart (default ``3*cols/32``, i.e. 24 at 256).
    Window centers are restricted so that the equivalent atom frequencies are
    FFT bins too.

    By default every chirp covers the whole image: windows are twice the
    image size, so they are clipped at the borders (the clipping warning is
    expected). Passing ``(lo, hi)`` fractions as ``azimuth_extent`` or
    ``range_extent`` draws shorter windows that fit inside the image instead.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n = len(weights)
    half_a, half_r = rows // 2, cols // 2
    ja = int(rng.integers(-half_a * 3 // 4, half_a * 3 // 4 + 1))
    limit = half_r * 3 // 4
    gap = max(1, round(3 * cols / 32)) if min_rate_gap is None else int(min_rate_gap)
    if (n - 1) * gap > 2 * limit:
        raise ParameterError(f"{n} range rates {gap} steps apart do not fit in +-{limit} steps")
    jrs, tries = [], 0
    while len(jrs) < n:
        tries += 1
        if tries > 100_000:
            raise ParameterError("could not place the range rates; lower min_rate_gap")
        cand = int(rng.integers(-limit, limit + 1))
        if all(abs(cand - j) >= gap for j in jrs):
            jrs.append(cand)
    ka = 2.0 * ja / rows ** 2

    def durations(extent, size):
        if extent is None:
            return [2.0 * size] * n
        return [float(round(rng.uniform(*extent) * size)) for _ in range(n)]

    tas, trs = durations(azimuth_extent, rows), durations(range_extent, cols)
    if azimuth_extent is None:
        alphas = _pick_centers(rng, _on_grid_centers(rows, ja), n)
    else:
        alphas = [float(rng.choice(_on_grid_centers(rows, ja, t))) for t in tas]
    comps = []
    for w, jr, ta, tr, alpha in zip(weights, jrs, tas, trs, alphas):
        cands = _on_grid_centers(cols, jr, None if range_extent is None else tr)
        beta = float(rng.choice(cands))
        fc = int(rng.integers(0, cols)) / cols
        phase = rng.uniform(0.0, 2.0 * np.pi)
        comps.append(LfmComponent(
            amplitude=w * np.exp(1j * phase), azimuth_fm_rate=ka, range_fm_rate=2.0 * jr / cols ** 2,
            carrier_freq=fc, azimuth_duration=ta, range_duration=tr,
            azimuth_center=alpha, range_center=beta))
    return LfmMixture(tuple(comps), ka)


@dataclass
class SimulationSpec:
    rows: int
    cols: int
    mixture: LfmMixture | None = None
    sir_db: float = 0.0
    snr_db: float | None = None
    seed: int = 0
    scene: dict = field(default_factory=lambda: {"type": "speckle", "mean_power": 1.0})
    random_components: int = 3

    def __post_init__(self):
        if self.rows < 16 or self.cols < 16:
            raise ParameterError("simulated images must be at least 16x16")

    @classmethod
    def from_dict(cls, d):
        try:
            rows, cols = int(d["rows"]), int(d["cols"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("simulation spec needs integer 'rows' and 'cols'") from None
        mixture = d.get("mixture")
        if mixture is not None:
            mixture = LfmMixture.from_dict(mixture)
        known = {k: d[k] for k in ("sir_db", "snr_db", "seed", "scene", "random_components") if k in d}
        return cls(rows=rows, cols=cols, mixture=mixture, **known)

    def to_dict(self):
        return {
            "schema": "rfi-scrub/simulation/1",
            "rows": self.rows, "cols": self.cols,
            "mixture": None if self.mixture is None else self.mixture.to_dict(),
            "sir_db": self.sir_db, "snr_db": self.snr_db, "seed": self.seed,
            "scene": self.scene, "random_components": self.random_components,
        }


@dataclass
class Simulation:
    clean: np.ndarray
    rfi: np.ndarray
    corrupted: np.ndarray
    mixture: LfmMixture
    scale: float


def simulate(spec: SimulationSpec) -> Simulation:
    """Build ``X = S + c*R (+ noise)`` with ``c`` set by ``spec.sir_db``.

    Without an explicit mixture, a random on-grid mixture with
    ``spec.random_components`` components (weights 1.0, 0.8, 0.5, ...) is
    drawn from the same seed.
    """
    rng = np.random.default_rng(spec.seed)
    scene_seed, mix_seed, noise_seed = rng.integers(0, 2 ** 63 - 1, size=3)
    clean = make_scene(spec.scene, spec.rows, spec.cols, int(scene_seed))
    mixture = spec.mixture
    if mixture is None:
        n = int(spec.random_components)
        weights = tuple(1.0 - 0.5 * i / max(n - 1, 1) if n > 1 else 1.0 for i in range(n))
        if n == 3:
            weights = (1.0, 0.8, 0.5)
        mixture = random_lfm_mixture(spec.rows, spec.cols, np.random.default_rng(int(mix_seed)), weights)
        with warnings.catch_warnings():
            # the random family is oversized on purpose
            warnings.simplefilter("ignore", WindowClippedWarning)
            raw = generate_lfm_mixture(mixture, spec.rows, spec.cols)
    else:
        raw = generate_lfm_mixture(mixture, spec.rows, spec.cols)
    rfi = scale_to_sir(clean, raw, spec.sir_db)
    scale = math.sqrt(energy(rfi) / energy(raw))
    corrupted = clean + rfi
    if spec.snr_db is not None:
        corrupted = add_noise(corrupted, spec.snr_db, int(noise_seed))
    return Simulation(clean, rfi, corrupted, mixture, scale)
