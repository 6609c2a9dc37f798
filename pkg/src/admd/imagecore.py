"""Grayscale image representation, file I/O and border handling.

Images are plain 2-D ``numpy.ndarray`` objects indexed ``[row, col]``
(``[y, x]``).  Loaded images are ``float32``; every windowed operator in
the package receives a :class:`BorderPolicy` and pads accordingly.

Supported formats
-----------------
* binary PGM (``P5``), 8- and 16-bit, big-endian 16-bit samples
* PNG, grayscale or RGB, 8- and 16-bit (read); 8-bit grayscale (write)
* raw dump: ``b"ADMDRAW1"`` + ``u32`` width + ``u32`` height, then
  little-endian ``float32`` samples in row-major order
"""
from __future__ import annotations

import enum
import os
import re
import struct
from pathlib import Path

import numpy as np
import png

__all__ = [
    "BorderPolicy",
    "ImageFormatError",
    "as_image",
    "load_image",
    "load_pgm",
    "load_png",
    "load_raw",
    "save_pgm",
    "save_png",
    "save_raw",
    "save_normalized",
    "normalize_to_255",
    "to_uint8",
    "pad",
    "crop",
]

RAW_MAGIC = b"ADMDRAW1"
_RAW_HEADER = struct.Struct("<8sII")
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class BorderPolicy(enum.Enum):
    """How windowed operators extend an image beyond its edges."""

    REPLICATE = "replicate"


class ImageFormatError(ValueError):
    """Raised for malformed or unsupported image files."""


def as_image(data, dtype=np.float32) -> np.ndarray:
    """Validate ``data`` as a non-empty, finite 2-D image and return a copy."""
    arr = np.array(data, dtype=dtype)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("image has a zero dimension")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf")
    return arr


# ----------------------------------------------------------------------
# Reading
# ----------------------------------------------------------------------

def load_image(path) -> np.ndarray:
    """Load a PGM, PNG or raw-dump file as a ``float32`` image.

    Intensities are returned as stored: no rescaling is applied, so
    16-bit data keeps its native ``[0, 65535]`` range.  The format is
    detected from the file's magic bytes, not its extension.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:2] == b"P5":
        return load_pgm(path)
    if head == b"\x89PNG\r\n\x1a\n":
        return load_png(path)
    if head == RAW_MAGIC:
        return load_raw(path)
    raise ImageFormatError(f"{path}: unsupported image format")


_PNM_TOKEN = re.compile(rb"(?:\s*(?:#[^\n]*\n)?)*\s*(\S+)")


def _pnm_header(buf: bytes):
    """Parse the four header tokens of a P5 file.

    Returns (tokens, offset of first sample byte).
    """
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PNM_TOKEN.match(buf, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(buf) or buf[pos:pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise ImageFormatError("malformed PGM header")
    return tokens, pos + 1


def load_pgm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    if buf[:2] != b"P5":
        raise ImageFormatError(f"{path}: not a binary PGM (P5) file")
    tokens, offset = _pnm_header(buf)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric PGM header field") from None
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: invalid maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    if len(buf) - offset < count * dtype.itemsize:
        raise ImageFormatError(f"{path}: truncated PGM raster")
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=offset)
    return data.reshape(height, width).astype(np.float32)


def load_png(path) -> np.ndarray:
    try:
        width, height, rows, info = png.Reader(filename=os.fspath(path)).asDirect()
        planes = info["planes"]
        data = np.vstack([np.asarray(r, dtype=np.float64) for r in rows])
    except png.Error as exc:
        raise ImageFormatError(f"{path}: {exc}") from None
    if width == 0 or height == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    data = data.reshape(height, width, planes)
    if info.get("alpha"):
        data = data[..., :-1]
        planes -= 1
    if planes == 1:
        img = data[..., 0]
    elif planes == 3:
        img = data @ np.asarray(LUMA_WEIGHTS)
    else:
        raise ImageFormatError(f"{path}: unsupported plane count {planes}")
    return img.astype(np.float32)


def load_raw(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    if len(buf) < _RAW_HEADER.size:
        raise ImageFormatError(f"{path}: truncated raw header")
    magic, width, height = _RAW_HEADER.unpack_from(buf)
    if magic != RAW_MAGIC:
        raise ImageFormatError(f"{path}: bad raw magic {magic!r}")
    if width == 0 or height == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    count = width * height
    if len(buf) - _RAW_HEADER.size != 4 * count:
        raise ImageFormatError(f"{path}: raw payload size mismatch")
    data = np.frombuffer(buf, dtype="<f4", count=count, offset=_RAW_HEADER.size)
    return data.reshape(height, width).astype(np.float32)


# ----------------------------------------------------------------------
# Writing
# ----------------------------------------------------------------------

def save_pgm(img, path, maxval: int | None = None) -> None:
    """Write integer-valued ``img`` as binary PGM.

    Values are rounded and clipped to ``[0, maxval]``.  ``maxval``
    defaults to 255, or 65535 when the image exceeds 255.
    """
    img = np.asarray(img)
    if maxval is None:
        maxval = 65535 if img.max() > 255 else 255
    dtype = ">u2" if maxval > 255 else "u1"
    raster = np.clip(np.floor(img.astype(np.float64) + 0.5), 0, maxval).astype(dtype)
    height, width = raster.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n%d\n" % (width, height, maxval))
        fh.write(raster.tobytes())


def save_png(img, path) -> None:
    """Write ``img`` as 8-bit grayscale PNG (rounded, clipped to [0, 255])."""
    raster = to_uint8(img)
    height, width = raster.shape
    writer = png.Writer(width, height, greyscale=True, bitdepth=8)
    with open(path, "wb") as fh:
        writer.write(fh, raster.tolist())


def save_raw(img, path) -> None:
    """Write the lossless raw dump (little-endian float32)."""
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("raw dump needs a non-empty 2-D image")
    height, width = img.shape
    with open(path, "wb") as fh:
        fh.write(_RAW_HEADER.pack(RAW_MAGIC, width, height))
        fh.write(np.ascontiguousarray(img, dtype="<f4").tobytes())


def normalize_to_255(img) -> np.ndarray:
    """Linearly map ``img`` onto ``[0, 255]`` (float64, unrounded).

    A constant image maps to all zeros.
    """
    img = np.asarray(img, dtype=np.float64)
    lo, hi = img.min(), img.max()
    if hi == lo:
        return np.zeros_like(img)
    # the product can round a hair past 255, so pin the range
    return np.clip(255.0 * (img - lo) / (hi - lo), 0.0, 255.0)


def to_uint8(img) -> np.ndarray:
    # round half up, so 127.5 -> 128
    return np.clip(np.floor(np.asarray(img, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def save_normalized(img, path) -> None:
    """Rescale ``img`` to ``[0, 255]``, round, and write it as 8-bit.

    ``v' = round(255 * (v - min) / (max - min))``; a constant image is
    written as zeros.  The container is chosen by extension: ``.pgm``
    gives P5, anything else PNG.
    """
    img = np.asarray(img)
    if img.size == 0:
        raise ValueError("cannot save an empty image")
    raster = to_uint8(normalize_to_255(img))
    if Path(path).suffix.lower() in (".pgm", ".pnm"):
        save_pgm(raster, path, maxval=255)
    else:
        save_png(raster, path)


# ----------------------------------------------------------------------
# Borders
# ----------------------------------------------------------------------

def pad(img, margin: int, policy: BorderPolicy = BorderPolicy.REPLICATE) -> np.ndarray:
    """Extend ``img`` by ``margin`` pixels on every side."""
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if policy is not BorderPolicy.REPLICATE:
        raise ValueError(f"unsupported border policy {policy!r}")
    return np.pad(np.asarray(img), margin, mode="edge")


def crop(img, margin: int) -> np.ndarray:
    """Inverse of :func:`pad`: drop ``margin`` pixels from every side."""
    img = np.asarray(img)
    if margin == 0:
        return img.copy()
    return img[margin:-margin, margin:-margin].copy()
