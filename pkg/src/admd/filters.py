"""Low-level operators: integral-image box mean, sparse grayscale
morphology and the scale-normalized Laplacian of Gaussian."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagecore import BorderPolicy, pad

__all__ = [
    "StructuringElement",
    "integral_image",
    "box_sums",
    "box_mean",
    "dilate",
    "erode",
    "opening",
    "directional_max_se",
    "log_kernel",
    "log_filter",
    "LOG_SIGMAS",
]

# 12-scale LoG grid, sigma_k = 1.26**k: blob diameters of roughly 2 to 24 px
LOG_SIGMAS = tuple(1.26 ** k for k in range(12))


@dataclass(frozen=True)
class StructuringElement:
    """Flat structuring element as a set of ``(dy, dx)`` offsets.

    The anchor sits at ``(0, 0)``; it is part of the element only if
    listed in ``offsets``.
    """

    offsets: tuple

    def __post_init__(self):
        offsets = tuple((int(dy), int(dx)) for dy, dx in self.offsets)
        if not offsets:
            raise ValueError("structuring element is empty")
        if len(set(offsets)) != len(offsets):
            raise ValueError("structuring element has duplicate offsets")
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def square(cls, side: int) -> StructuringElement:
        _check_odd(side, "side")
        r = side // 2
        return cls(tuple((dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)))

    @classmethod
    def rectangle(cls, height: int, width: int) -> StructuringElement:
        _check_odd(height, "height")
        _check_odd(width, "width")
        ry, rx = height // 2, width // 2
        return cls(tuple((dy, dx) for dy in range(-ry, ry + 1) for dx in range(-rx, rx + 1)))

    @classmethod
    def from_mask(cls, mask) -> StructuringElement:
        """Build from an odd-sized boolean footprint centred on the anchor."""
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2 or mask.shape[0] % 2 == 0 or mask.shape[1] % 2 == 0:
            raise ValueError("mask must be 2-D with odd sides")
        cy, cx = mask.shape[0] // 2, mask.shape[1] // 2
        return cls(tuple((int(y) - cy, int(x) - cx) for y, x in zip(*np.nonzero(mask))))

    def reflect(self) -> StructuringElement:
        return StructuringElement(tuple((-dy, -dx) for dy, dx in self.offsets))

    @property
    def radius(self) -> int:
        """Chebyshev radius: largest ``max(|dy|, |dx|)`` over the offsets."""
        return max(max(abs(dy), abs(dx)) for dy, dx in self.offsets)

    def to_mask(self) -> np.ndarray:
        r = self.radius
        mask = np.zeros((2 * r + 1, 2 * r + 1), dtype=bool)
        for dy, dx in self.offsets:
            mask[r + dy, r + dx] = True
        return mask

    def __len__(self):
        return len(self.offsets)


def _check_odd(value: int, name: str) -> None:
    if int(value) != value or value < 1 or value % 2 == 0:
        raise ValueError(f"{name} must be a positive odd integer, got {value}")


def integral_image(img) -> np.ndarray:
    """Summed-area table with a leading zero row and column (float64).

    ``table[y, x]`` is the sum of ``img[:y, :x]``.
    """
    img = np.asarray(img, dtype=np.float64)
    table = np.zeros((img.shape[0] + 1, img.shape[1] + 1))
    np.cumsum(img, axis=0, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return table


def box_sums(img, side: int) -> np.ndarray:
    """Sums of every ``side x side`` window lying fully inside ``img``.

    The result has shape ``(h - side + 1, w - side + 1)``; element
    ``[y, x]`` is the window whose top-left pixel is ``img[y, x]``.
    No padding is applied here.
    """
    table = integral_image(img)
    s = side
    return table[s:, s:] - table[:-s, s:] - table[s:, :-s] + table[:-s, :-s]


def box_mean(img, side: int, policy: BorderPolicy = BorderPolicy.REPLICATE) -> np.ndarray:
    """Mean over a centred ``side x side`` window via an integral image."""
    img = np.asarray(img)
    _check_odd(side, "side")
    if side > min(img.shape):
        raise ValueError(f"side {side} exceeds the image size {img.shape}")
    padded = pad(img, side // 2, policy)
    dtype = np.result_type(img.dtype, np.float32)
    return (box_sums(padded, side) / (side * side)).astype(dtype, copy=False)


def _check_extent(img: np.ndarray, se: StructuringElement) -> None:
    # offsets must stay inside the image extent along each axis
    h, w = img.shape
    if any(abs(dy) >= h or abs(dx) >= w for dy, dx in se.offsets):
        raise ValueError(f"structuring element {se.offsets} too large for image {img.shape}")


def dilate(img, se: StructuringElement,
           policy: BorderPolicy = BorderPolicy.REPLICATE) -> np.ndarray:
    """Grayscale dilation: ``out[i, j] = max img[i + dy, j + dx]`` over ``se``.

    Implemented as a running maximum of shifted views, one read per
    offset and pixel.
    """
    img = np.asarray(img)
    _check_extent(img, se)
    r = se.radius
    h, w = img.shape
    padded = pad(img, r, policy)
    offsets = iter(se.offsets)
    dy, dx = next(offsets)
    out = padded[r + dy:r + dy + h, r + dx:r + dx + w].copy()
    for dy, dx in offsets:
        np.maximum(out, padded[r + dy:r + dy + h, r + dx:r + dx + w], out=out)
    return out


def erode(img, se: StructuringElement,
          policy: BorderPolicy = BorderPolicy.REPLICATE) -> np.ndarray:
    """Grayscale erosion, the min-counterpart of :func:`dilate` using the
    reflected element: ``out[i, j] = min img[i - dy, j - dx]``."""
    img = np.asarray(img)
    _check_extent(img, se)
    r = se.radius
    h, w = img.shape
    padded = pad(img, r, policy)
    offsets = iter(se.reflect().offsets)
    dy, dx = next(offsets)
    out = padded[r + dy:r + dy + h, r + dx:r + dx + w].copy()
    for dy, dx in offsets:
        np.minimum(out, padded[r + dy:r + dy + h, r + dx:r + dx + w], out=out)
    return out


def opening(img, se: StructuringElement,
            policy: BorderPolicy = BorderPolicy.REPLICATE) -> np.ndarray:
    """Morphological opening, ``dilate(erode(img, se), se)``."""
    return dilate(erode(img, se, policy), se, policy)


def directional_max_se(cell: int) -> StructuringElement:
    """Eight-point element picking the centres of the surrounding cells.

    For a ``cell x cell`` target window the neighbouring cells are
    centred ``cell`` pixels away along the rows, columns and diagonals.
    The anchor itself is excluded.  ``cell=3`` yields the sparse 9x9
    footprint used for 3x3 targets.
    """
    _check_odd(cell, "cell")
    if cell < 3:
        raise ValueError("cell must be at least 3")
    c = cell
    return StructuringElement((
        (-c, -c), (-c, 0), (-c, c),
        (0, -c), (0, c),
        (c, -c), (c, 0), (c, c),
    ))


def _log_profiles(sigma: float):
    radius = math.ceil(3 * sigma)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    gauss = np.exp(-t * t / (2 * sigma * sigma))
    curv = (sigma * sigma - t * t) * gauss
    return radius, gauss, curv


def log_kernel(sigma: float) -> np.ndarray:
    """Negated, scale-normalized LoG kernel ``-sigma^2 * lap(G)``.

    Truncated at ``ceil(3 sigma)`` and shifted to zero mean, so flat
    regions give exactly zero and bright blobs respond positively.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    _, gauss, curv = _log_profiles(sigma)
    norm = 1.0 / (2 * math.pi * sigma ** 4)
    k = norm * (np.outer(curv, gauss) + np.outer(gauss, curv))
    return k - k.mean()


def log_filter(img, sigma: float,
               policy: BorderPolicy = BorderPolicy.REPLICATE) -> np.ndarray:
    """Correlate ``img`` with :func:`log_kernel` (float64 output).

    The kernel is a sum of separable terms (two LoG halves and the DC
    correction), so the work is six 1-D passes instead of a dense 2-D
    convolution.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if policy is not BorderPolicy.REPLICATE:
        raise ValueError(f"unsupported border policy {policy!r}")
    img = np.asarray(img, dtype=np.float64)
    radius, gauss, curv = _log_profiles(sigma)
    norm = 1.0 / (2 * math.pi * sigma ** 4)
    size = 2 * radius + 1
    dc = norm * 2 * curv.sum() * gauss.sum() / (size * size)

    def sep(rows, cols):
        tmp = ndimage.correlate1d(img, rows, axis=0, mode="nearest")
        return ndimage.correlate1d(tmp, cols, axis=1, mode="nearest")

    out = norm * (sep(curv, gauss) + sep(gauss, curv))
    out -= dc * sep(np.ones(size), np.ones(size))
    return out
