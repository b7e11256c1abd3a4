"""Chirp atoms, parameter grids and matrix-free dictionary operators.

A dictionary column is a chirp atom indexed by a (frequency, rate) pair.
Columns are ordered rate-major: flat index ``k = rate_index * freq_count +
freq_index``, so a coefficient vector reshapes to ``(rate_count,
freq_count)``.

Two evaluation modes exist. ``"dense"`` builds the atoms of one rate at a
time and multiplies explicitly. ``"dechirp-fft"`` deramps by each grid rate
and reads the frequency grid off an FFT; it only applies when the frequency
grid lands on FFT bins, and the operator falls back to dense otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, ParameterError, chirp

_BATCH_LIMIT = 4_000_000

AZIMUTH = "azimuth"
RANGE = "range"
_SIGN = {AZIMUTH: -1, RANGE: +1}


def azimuth_atom(freq, rate, length) -> np.ndarray:
    """Entry ``m`` is ``exp(-1j*pi*(freq*m + rate*m**2))``."""
    return chirp(freq, rate, length, sign=-1)


def range_atom(freq, rate, length) -> np.ndarray:
    """Entry ``n`` is ``exp(+1j*pi*(freq*n + rate*n**2))``."""
    return chirp(freq, rate, length, sign=+1)


def kron_atom(az, rg) -> np.ndarray:
    """2-D atom ``image[m, n] = az[m] * rg[n]``, i.e. ``kron(az, rg)`` reshaped."""
    az = np.asarray(az, dtype=np.complex128).ravel()
    rg = np.asarray(rg, dtype=np.complex128).ravel()
    if az.size < 1 or rg.size < 1:
        raise DimensionError("atoms must be non-empty")
    return np.outer(az, rg)


def _linspace(lo, hi, count):
    if count == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class ParameterGrid:
    """Uniform frequency x rate search grid for one image axis."""

    freq_min: float
    freq_max: float
    freq_count: int
    rate_min: float
    rate_max: float
    rate_count: int
    sign: str = AZIMUTH

    def __post_init__(self):
        if self.sign not in _SIGN:
            raise ParameterError(f"sign must be 'azimuth' or 'range', got {self.sign!r}")
        if int(self.freq_count) < 1 or int(self.rate_count) < 1:
            raise ParameterError("grid counts must be >= 1")
        if self.freq_min > self.freq_max or self.rate_min > self.rate_max:
            raise ParameterError("grid bounds must satisfy min <= max")
        object.__setattr__(self, "freq_count", int(self.freq_count))
        object.__setattr__(self, "rate_count", int(self.rate_count))

    @property
    def freqs(self) -> np.ndarray:
        return _linspace(self.freq_min, self.freq_max, self.freq_count)

    @property
    def rates(self) -> np.ndarray:
        return _linspace(self.rate_min, self.rate_max, self.rate_count)

    @property
    def size(self) -> int:
        return self.freq_count * self.rate_count

    @property
    def freq_step(self) -> float:
        if self.freq_count == 1:
            return 0.0
        return (self.freq_max - self.freq_min) / (self.freq_count - 1)

    @property
    def rate_step(self) -> float:
        if self.rate_count == 1:
            return 0.0
        return (self.rate_max - self.rate_min) / (self.rate_count - 1)

    def unravel(self, k):
        """Flat atom index -> ``(freq, rate)``."""
        r, f = divmod(int(k), self.freq_count)
        return float(self.freqs[f]), float(self.rates[r])

    def fft_bins(self, length):
        """FFT bin indices of the frequency grid, or ``None`` if it is not bin-aligned.

        Bin ``b`` of a length-``L`` transform sits at frequency ``2*b/L`` in the
        ``pi``-exponent convention.
        """
        if self.freq_count > length:
            return None
        bin_width = 2.0 / length
        start = self.freq_min / bin_width
        if abs(start - round(start)) > 1e-9:
            return None
        if self.freq_count > 1 and abs(self.freq_step / bin_width - 1.0) > 1e-9:
            return None
        return (int(round(start)) + np.arange(self.freq_count)) % length

    def to_dict(self):
        return {"freq_min": self.freq_min, "freq_max": self.freq_max, "freq_count": self.freq_count,
                "rate_min": self.rate_min, "rate_max": self.rate_max, "rate_count": self.rate_count}

    @classmethod
    def from_dict(cls, d, sign):
        keys = ("freq_min", "freq_max", "freq_count", "rate_min", "rate_max", "rate_count")
        missing = [k for k in keys if k not in d]
        if missing:
            raise ParameterError(f"grid description is missing keys {missing}")
        return cls(*(d[k] for k in keys), sign=sign)


def default_grid(length, sign=AZIMUTH) -> ParameterGrid:
    """FFT-aligned frequency grid and a rate grid spanning ``+-1/length``.

    Rates step by ``2/length**2``, the resolution at which two chirps of this
    length drift apart by half a turn at the aperture edge.
    """
    length = int(length)
    if length < 1:
        raise DimensionError("length must be positive")
    return ParameterGrid(
        freq_min=0.0, freq_max=2.0 * (length - 1) / length, freq_count=length,
        rate_min=-1.0 / length, rate_max=1.0 / length, rate_count=length + 1,
        sign=sign)


class DictionaryOperator:
    """Matrix-free chirp dictionary ``D`` for one axis.

    ``apply(h)`` computes ``D @ h`` and ``adjoint(y)`` computes ``D^H @ y``.
    With ``normalized=True`` every column has unit norm. ``adjoint`` accepts
    a 2-D ``y`` of shape ``(length, n_lines)`` and then returns
    ``(size, n_lines)``.
    """

    def __init__(self, grid: ParameterGrid, length: int, mode="dechirp-fft", normalized=False):
        if int(length) < 1:
            raise DimensionError("operator length must be positive")
        if mode not in ("dense", "dechirp-fft"):
            raise ParameterError(f"unknown dictionary mode {mode!r}")
        self.grid = grid
        self.length = int(length)
        self.requested_mode = mode
        self.normalized = bool(normalized)
        self._bins = grid.fft_bins(self.length) if mode == "dechirp-fft" else None
        self.mode = "dechirp-fft" if self._bins is not None else "dense"
        self._sign = _SIGN[grid.sign]
        self._scale = 1.0 / np.sqrt(self.length) if self.normalized else 1.0
        self._rates = grid.rates
        self._freqs = grid.freqs
        self._idx = np.arange(self.length)
        self._chirps = None
        self._tones = None
        if self.grid.rate_count * self.length <= 4_000_000:
            self._chirps = np.stack([chirp(0.0, k, self.length, sign=self._sign) for k in self._rates])

    @property
    def shape(self):
        return (self.length, self.grid.size)

    def rate_chirp(self, r) -> np.ndarray:
        if self._chirps is not None:
            return self._chirps[r]
        return chirp(0.0, self._rates[r], self.length, sign=self._sign)

    def rate_block(self, r) -> np.ndarray:
        """Dense ``(length, freq_count)`` block of atoms sharing rate ``r`` (scaled)."""
        if self._tones is None:
            phase_f = np.mod(np.outer(self._idx, self._freqs), 2.0)
            self._tones = np.exp(self._sign * 1j * np.pi * phase_f)
        return self._scale * self.rate_chirp(r)[:, None] * self._tones

    def atom(self, k) -> np.ndarray:
        freq, rate = self.grid.unravel(k)
        return self._scale * chirp(freq, rate, self.length, sign=self._sign)

    def dense_matrix(self) -> np.ndarray:
        return np.concatenate([self.rate_block(r) for r in range(self.grid.rate_count)], axis=1)

    def apply(self, h) -> np.ndarray:
        """``D @ h``; ``h`` may be ``(size,)`` or ``(size, n_lines)``."""
        h = np.asarray(h, dtype=np.complex128)
        if h.ndim not in (1, 2) or h.shape[0] != self.grid.size:
            raise DimensionError(f"coefficients must have {self.grid.size} rows, got {h.shape}")
        vec = h.ndim == 1
        H = h.reshape(self.grid.rate_count, self.grid.freq_count, -1)
        n = H.shape[2]
        R, L = self.grid.rate_count, self.length
        out = np.zeros((L, n), dtype=np.complex128)
        if self.mode == "dense":
            # rate_block already carries the column scale
            for r in range(R):
                out += self.rate_block(r) @ H[r]
            return out[:, 0] if vec else out
        if self._chirps is not None and R * L * n <= _BATCH_LIMIT:
            placed = np.zeros((R, L, n), dtype=np.complex128)
            placed[:, self._bins, :] = H
            out = np.einsum("rl,rln->ln", self._chirps, self._tones_of(placed))
        else:
            for r in range(R):
                placed = np.zeros((L, n), dtype=np.complex128)
                placed[self._bins] = H[r]
                out += self.rate_chirp(r)[:, None] * self._tones_of(placed[None])[0]
        out *= self._scale
        return out[:, 0] if vec else out

    def _tones_of(self, placed):
        # sum_k h_k exp(sign*2j*pi*b_k*i/L) along axis 1
        if self._sign < 0:
            return np.fft.fft(placed, axis=1)
        return np.fft.ifft(placed, axis=1) * self.length

    def _spectrum_of(self, deramped):
        # sum_i y_i exp(-sign*2j*pi*b*i/L) along axis 1
        if self._sign < 0:
            return np.fft.ifft(deramped, axis=1) * self.length
        return np.fft.fft(deramped, axis=1)

    def adjoint(self, y) -> np.ndarray:
        """``D^H @ y``; ``y`` may be ``(length,)`` or ``(length, n_lines)``."""
        y = np.asarray(y, dtype=np.complex128)
        if y.ndim not in (1, 2) or y.shape[0] != self.length:
            raise DimensionError(f"signal must have leading length {self.length}, got {y.shape}")
        vec = y.ndim == 1
        Y = y[:, None] if vec else y
        R, L, n = self.grid.rate_count, self.length, Y.shape[1]
        if self.mode != "dense" and self._chirps is not None and R * L * n <= _BATCH_LIMIT:
            spec = self._spectrum_of(np.conj(self._chirps)[:, :, None] * Y[None])
            out = self._scale * spec[:, self._bins, :]
        else:
            out = np.empty((R, self.grid.freq_count, n), dtype=np.complex128)
            for r in range(R):
                out[r] = self.adjoint_rate(Y, r)
        out = out.reshape(self.grid.size, n)
        return out[:, 0] if vec else out

    def adjoint_rate(self, Y, r) -> np.ndarray:
        """Correlations of every column of ``Y`` with the atoms of rate ``r``.

        Returns ``(freq_count, n_lines)``.
        """
        if self.mode == "dense":
            return self.rate_block(r).conj().T @ Y
        deramped = np.conj(self.rate_chirp(r))[:, None] * Y
        return self._scale * self._spectrum_of(deramped[None])[0][self._bins]

    def norm_squared(self, iters=20, seed=0) -> float:
        """Power-iteration estimate of the largest eigenvalue of ``D^H D``."""
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.grid.size) + 1j * rng.standard_normal(self.grid.size)
        v /= np.linalg.norm(v)
        est = 0.0
        for _ in range(iters):
            w = self.adjoint(self.apply(v))
            est = float(np.linalg.norm(w))
            if est == 0.0:
                return 0.0
            v = w / est
        return est


def dictionary_apply(op: DictionaryOperator, h) -> np.ndarray:
    return op.apply(h)


def dictionary_adjoint(op: DictionaryOperator, y) -> np.ndarray:
    return op.adjoint(y)
