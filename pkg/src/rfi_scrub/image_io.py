"""CIMG complex-image files, PNG magnitude rendering and JSON config loading.

CIMG layout (all integers and floats little-endian)::

    offset 0   6 bytes   magic b"CIMG1\\0"
    offset 6   u32       rows
    offset 10  u32       cols
    offset 14  u8        precision code, 0 = float32, 1 = float64
    offset 15  payload   rows*cols (real, imag) pairs, row-major
"""
from __future__ import annotations

import json
import os
import struct

import numpy as np

from .core import ConfigError, FormatError, ParameterError, as_image

MAGIC = b"CIMG1\x00"
HEADER = struct.Struct("<6sIIB")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {32: 0, 64: 1}
MAX_DIM = 2 ** 32 - 1


def encode_cimg(X, precision=64) -> bytes:
    X = as_image(X)
    if precision not in _CODES:
        raise ParameterError(f"precision must be 32 or 64, got {precision!r}")
    rows, cols = X.shape
    if rows > MAX_DIM or cols > MAX_DIM:
        raise ParameterError("image dimensions exceed the u32 header fields")
    code = _CODES[precision]
    pairs = np.empty((rows, cols, 2), dtype=_DTYPES[code])
    pairs[..., 0] = X.real
    pairs[..., 1] = X.imag
    return HEADER.pack(MAGIC, rows, cols, code) + pairs.tobytes()


def decode_cimg(data: bytes) -> np.ndarray:
    """Parse CIMG bytes; every defect raises :class:`FormatError` with the offending offset."""
    data = bytes(data)
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        bad = next((i for i, (a, b) in enumerate(zip(data, MAGIC)) if a != b), min(len(data), len(MAGIC)))
        raise FormatError(f"bad magic at byte offset {bad}", offset=bad)
    if len(data) < HEADER.size:
        raise FormatError(f"header truncated: expected {HEADER.size} bytes, got {len(data)}",
                          offset=len(data))
    _, rows, cols, code = HEADER.unpack_from(data)
    if rows == 0 or cols == 0:
        raise FormatError(f"empty image {rows}x{cols} at byte offset 6", offset=6)
    if code not in _DTYPES:
        raise FormatError(f"unknown precision code {code} at byte offset 14", offset=14)
    dtype = _DTYPES[code]
    expected = rows * cols * 2 * dtype.itemsize
    actual = len(data) - HEADER.size
    if actual != expected:
        raise FormatError(f"payload length mismatch: expected {expected} bytes, got {actual}",
                          offset=HEADER.size + min(actual, expected))
    pairs = np.frombuffer(data, dtype=dtype, offset=HEADER.size).reshape(rows, cols, 2)
    finite = np.isfinite(pairs)
    if not finite.all():
        first = int(np.flatnonzero(~finite.ravel())[0])
        off = HEADER.size + first * dtype.itemsize
        raise FormatError(f"non-finite sample at byte offset {off}", offset=off)
    out = np.empty((rows, cols), dtype=np.complex128)
    out.real = pairs[..., 0]
    out.imag = pairs[..., 1]
    return out


def write_cimg(path, X, precision=64) -> None:
    """Write ``X`` as a CIMG file with 32- or 64-bit float components."""
    blob = encode_cimg(X, precision)
    with open(path, "wb") as fh:
        fh.write(blob)


def read_cimg(path) -> np.ndarray:
    """Read a CIMG file; 32-bit payloads are widened to complex128."""
    with open(path, "rb") as fh:
        return decode_cimg(fh.read())


def cimg_precision(path) -> int:
    """Float width (32 or 64) recorded in a CIMG header."""
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
    if len(head) < HEADER.size or head[:len(MAGIC)] != MAGIC:
        raise FormatError("not a CIMG file", offset=0)
    code = head[14]
    if code not in _DTYPES:
        raise FormatError(f"unknown precision code {code} at byte offset 14", offset=14)
    return 32 if code == 0 else 64


def magnitude_to_gray(X, dyn_range_db=40.0) -> np.ndarray:
    """Map ``20*log10(|x|/max|x|)`` from ``[-dyn_range_db, 0]`` linearly onto ``0..255``."""
    if not dyn_range_db > 0:
        raise ParameterError("dyn_range_db must be positive")
    mag = np.abs(as_image(X))
    peak = float(mag.max())
    out = np.zeros(mag.shape, dtype=np.uint8)
    if peak <= 0:
        return out
    nz = mag > 0
    db = 20.0 * np.log10(mag[nz] / peak)
    level = np.clip((db + dyn_range_db) / dyn_range_db, 0.0, 1.0) * 255.0
    out[nz] = np.rint(level).astype(np.uint8)
    return out


def render_png(X, path, dyn_range_db=40.0) -> None:
    """Save the log-magnitude of ``X`` as an 8-bit grayscale PNG."""
    from PIL import Image

    Image.fromarray(magnitude_to_gray(X, dyn_range_db)).save(path, format="PNG")


def load_config(path) -> dict:
    """Read a JSON configuration object; a missing file or bad JSON is a :class:`ConfigError`."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    return cfg
