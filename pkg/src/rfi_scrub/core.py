"""Shared image and parameter types.

Images are plain 2-D ``complex128`` numpy arrays (rows = azimuth, columns =
range). :func:`as_image` is the single entry point that validates and
normalizes anything the rest of the package receives.

Frequencies and FM rates are always the coefficients that sit inside a
``pi * (...)`` exponent, so an atom ``exp(-1j*pi*(f*m + K*m**2))`` has
frequency ``f`` and rate ``K``. The carrier term of an interference
component keeps its explicit factor of two: ``exp(2j*pi*f_c*n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class RfiScrubError(Exception):
    """Base class for errors raised by this package."""

    category = "error"


class DimensionError(RfiScrubError, ValueError):
    category = "dimension"


class ParameterError(RfiScrubError, ValueError):
    category = "parameter"


class DataError(RfiScrubError, ValueError):
    category = "data"


class FormatError(RfiScrubError, ValueError):
    """Malformed file contents. ``offset`` is the byte position at fault."""

    category = "format"

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ConfigError(RfiScrubError, ValueError):
    category = "config"


def as_image(x, name="image") -> np.ndarray:
    """Validate ``x`` as a complex image and return it as ``complex128``.

    Raises :class:`DimensionError` unless ``x`` is 2-D with both sides at
    least one, and :class:`DataError` if any sample is NaN or infinite.
    """
    arr = np.asarray(x)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains NaN or Inf samples")
    return arr


def hadamard_multiply(a, b) -> np.ndarray:
    a = as_image(a, "a")
    b = as_image(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def energy(x) -> float:
    """Sum of squared magnitudes (squared Frobenius norm)."""
    x = np.asarray(x)
    return float(np.sum(x.real ** 2 + x.imag ** 2))


def reduced_phase(coeff_lin, coeff_quad, idx) -> np.ndarray:
    """Return ``(coeff_lin*idx + coeff_quad*idx**2) mod 2`` for integer ``idx``.

    The quadratic term is reduced on its own before adding the linear term so
    that large ``idx**2`` does not swamp the fractional part.
    """
    idx = np.asarray(idx, dtype=np.float64)
    quad = np.mod(coeff_quad * (idx * idx), 2.0)
    lin = np.mod(coeff_lin * idx, 2.0)
    return np.mod(quad + lin, 2.0)


def chirp(coeff_lin, coeff_quad, length, sign=-1) -> np.ndarray:
    """Unit-modulus vector ``exp(sign*1j*pi*(f*i + K*i**2))`` for ``i < length``."""
    if int(length) < 1:
        raise DimensionError(f"length must be positive, got {length}")
    phase = reduced_phase(coeff_lin, coeff_quad, np.arange(int(length)))
    return np.exp(sign * 1j * np.pi * phase)


@dataclass(frozen=True)
class LfmComponent:
    """One separable 2-D LFM interference term.

    The component evaluates to::

        amplitude * rect((m - azimuth_center) / azimuth_duration)
                  * exp(-1j*pi*azimuth_fm_rate*(m - azimuth_center)**2)
                  * rect((n - range_center) / range_duration)
                  * exp(1j*pi*range_fm_rate*(n - range_center)**2
                        + 2j*pi*carrier_freq*(n - range_center))
    """

    amplitude: complex
    azimuth_fm_rate: float
    range_fm_rate: float
    carrier_freq: float
    azimuth_duration: float
    range_duration: float
    azimuth_center: float
    range_center: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        for name in ("azimuth_fm_rate", "range_fm_rate", "carrier_freq", "azimuth_duration",
                     "range_duration", "azimuth_center", "range_center"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not np.isfinite(self.amplitude):
            raise ParameterError("amplitude must be finite")
        if self.azimuth_duration <= 0 or self.range_duration <= 0:
            raise ParameterError("durations must be positive")
        if abs(self.azimuth_fm_rate) > 1 or abs(self.range_fm_rate) > 1:
            raise ParameterError("FM rates must satisfy |K| <= 1")

    def check_fits(self, rows, cols):
        if not (0 <= self.azimuth_center < rows and 0 <= self.range_center < cols):
            raise ParameterError(
                f"component center ({self.azimuth_center}, {self.range_center}) "
                f"outside a {rows}x{cols} image")

    def to_dict(self):
        return {
            "amplitude": [self.amplitude.real, self.amplitude.imag],
            "azimuth_fm_rate": self.azimuth_fm_rate,
            "range_fm_rate": self.range_fm_rate,
            "carrier_freq": self.carrier_freq,
            "azimuth_duration": self.azimuth_duration,
            "range_duration": self.range_duration,
            "azimuth_center": self.azimuth_center,
            "range_center": self.range_center,
        }

    @classmethod
    def from_dict(cls, d, azimuth_fm_rate=None):
        d = dict(d)
        amp = d.pop("amplitude", 1.0)
        if isinstance(amp, (list, tuple)):
            amp = complex(amp[0], amp[1])
        if azimuth_fm_rate is not None:
            d.setdefault("azimuth_fm_rate", azimuth_fm_rate)
        try:
            return cls(amplitude=amp, **d)
        except TypeError as exc:
            raise ConfigError(f"bad LFM component fields: {exc}") from None


L_MAX_COMPONENTS = 64


@dataclass(frozen=True)
class LfmMixture:
    """Ordered LFM components sharing one azimuth FM rate."""

    components: tuple
    azimuth_fm_rate: float = field(default=None)

    def __post_init__(self):
        comps = tuple(self.components)
        if not 1 <= len(comps) <= L_MAX_COMPONENTS:
            raise ParameterError(f"a mixture needs 1..{L_MAX_COMPONENTS} components, got {len(comps)}")
        rate = comps[0].azimuth_fm_rate if self.azimuth_fm_rate is None else float(self.azimuth_fm_rate)
        for i, c in enumerate(comps):
            if c.azimuth_fm_rate != rate:
                raise ParameterError(
                    f"component {i} has azimuth rate {c.azimuth_fm_rate}, mixture shares {rate}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "azimuth_fm_rate", rate)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def to_dict(self):
        return {"azimuth_fm_rate": self.azimuth_fm_rate,
                "components": [c.to_dict() for c in self.components]}

    @classmethod
    def from_dict(cls, d):
        rate = d.get("azimuth_fm_rate")
        comps = [LfmComponent.from_dict(c, azimuth_fm_rate=rate) for c in d.get("components", [])]
        return cls(tuple(comps), rate)


def as_mixture(components: Sequence[LfmComponent] | LfmMixture) -> LfmMixture:
    if isinstance(components, LfmMixture):
        return components
    return LfmMixture(tuple(components))
