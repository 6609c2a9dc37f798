"""Small-target detectors mapping a grayscale image to a saliency map.

All detectors return float64 maps with the input's shape.  Windows that
reach past the image edge see replicate-padded pixels, so the border band
(1.5 cells wide) is computed rather than cropped.

Sums, not means, are carried through the contrast computations and
divided by the cell area only at the end.  For integer-valued inputs the
sums are exact in float64, which makes shift invariance and the
agreement between :func:`admd_naive` and :func:`admd_efficient` exact.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import reduce

import numpy as np

from .filters import (
    LOG_SIGMAS,
    StructuringElement,
    box_sums,
    dilate,
    directional_max_se,
    log_filter,
    opening,
)
from .imagecore import BorderPolicy, pad

__all__ = [
    "DEFAULT_SCALES",
    "MAX_CELL",
    "validate_scales",
    "cell_means",
    "directional_differences",
    "aagd",
    "admd_naive",
    "admd_efficient",
    "multiscale",
    "tophat",
    "ms_log",
    "ALGORITHMS",
    "detect",
]

DEFAULT_SCALES = (3, 5, 7, 9)
# small targets span at most 9x9 pixels
MAX_CELL = 9


def validate_scales(scales, max_cell: int | None = MAX_CELL) -> tuple:
    """Return ``scales`` as a tuple after checking it is a valid scale set.

    A scale set is non-empty, strictly increasing and odd-valued.
    ``max_cell=None`` lifts the upper bound.
    """
    scales = tuple(int(s) for s in scales)
    if not scales:
        raise ValueError("scale set is empty")
    if any(s < 1 or s % 2 == 0 for s in scales):
        raise ValueError(f"scales must be positive odd integers: {scales}")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError(f"scales must be strictly increasing: {scales}")
    if max_cell is not None and scales[-1] > max_cell:
        raise ValueError(f"scale {scales[-1]} exceeds the bound {max_cell}")
    return scales


def _check_cell(img: np.ndarray, cell: int) -> None:
    if int(cell) != cell or cell < 1 or cell % 2 == 0:
        raise ValueError(f"cell must be a positive odd integer, got {cell}")
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    if 3 * cell > min(img.shape):
        raise ValueError(
            f"image {img.shape} is smaller than the {3 * cell}x{3 * cell} local window")


# ----------------------------------------------------------------------
# Naive path: every cell summed pixel by pixel
# ----------------------------------------------------------------------

def _direct_cell_sums(img: np.ndarray, cell: int) -> np.ndarray:
    """Sums over the nine cells around every pixel, by direct summation.

    Returns shape ``(9, h, w)``; index 0 is the central cell, 1..8
    follow the offsets of :func:`directional_max_se`.
    """
    h, w = img.shape
    r = cell // 2
    margin = cell + r
    padded = pad(np.asarray(img, dtype=np.float64), margin, BorderPolicy.REPLICATE)
    offsets = ((0, 0),) + directional_max_se(cell).offsets
    sums = np.zeros((9, h, w))
    for k, (dy, dx) in enumerate(offsets):
        acc = sums[k]
        for u in range(-r, r + 1):
            y0 = margin + dy + u
            for v in range(-r, r + 1):
                x0 = margin + dx + v
                acc += padded[y0:y0 + h, x0:x0 + w]
    return sums


def cell_means(img, cell: int) -> np.ndarray:
    """Mean intensity of each of the nine cells around every pixel.

    The local ``3*cell`` square is tiled into nine ``cell x cell`` cells;
    index 0 is the central (target) cell and indices 1..8 are the cells
    whose centres lie ``cell`` pixels away, ordered as the offsets of
    :func:`~admd.filters.directional_max_se`.

    Returns
    -------
    ndarray, shape (9, h, w)
    """
    img = np.asarray(img)
    _check_cell(img, cell)
    return _direct_cell_sums(img, cell) / (cell * cell)


def _suppressed_square(diff: np.ndarray) -> np.ndarray:
    # H(x) * x**2 with H(0) = 1
    return np.where(diff >= 0, diff * diff, 0.0)


def directional_differences(img, cell: int) -> np.ndarray:
    """The eight suppressed directional contrasts ``D_k``, shape (8, h, w).

    ``D_k = H(m0 - mk) * (m0 - mk)**2`` where ``H`` is the Heaviside step
    with ``H(0) = 1``.
    """
    img = np.asarray(img)
    _check_cell(img, cell)
    sums = _direct_cell_sums(img, cell)
    n = cell * cell
    return _suppressed_square((sums[0] - sums[1:]) / n)


def admd_naive(img, cell: int) -> np.ndarray:
    """ADMD by evaluating all eight directional contrasts and taking the
    pixelwise minimum.  Reference implementation; ``O(9 cell^2)`` per pixel."""
    return directional_differences(img, cell).min(axis=0)


# ----------------------------------------------------------------------
# Efficient path: integral-image averaging + sparse dilation
# ----------------------------------------------------------------------

def _extended_box_sums(img: np.ndarray, side: int, reach: int) -> np.ndarray:
    """Centred ``side``-box sums on the image grid extended by ``reach``
    pixels per side, computed from a replicate-padded copy."""
    padded = pad(np.asarray(img, dtype=np.float64), reach + side // 2, BorderPolicy.REPLICATE)
    return box_sums(padded, side)


def admd_efficient(img, cell: int) -> np.ndarray:
    """ADMD via local averaging followed by one grayscale dilation.

    The largest surrounding-cell mean is obtained by dilating the
    box-filtered image with the eight-point element of
    :func:`~admd.filters.directional_max_se`; the output is
    ``H(m0 - Mdir) * (m0 - Mdir)**2``.  Since every suppressed term is
    either zero or a squared positive gap, the minimum over directions
    equals the squared gap to the largest neighbour mean.
    """
    img = np.asarray(img)
    _check_cell(img, cell)
    h, w = img.shape
    c = cell
    # box sums on a grid extended by one cell, so neighbour cells that
    # overhang the border are true means of the padded image
    m0_ext = _extended_box_sums(img, c, c)
    m_dir = dilate(m0_ext, directional_max_se(c))[c:c + h, c:c + w]
    diff = (m0_ext[c:c + h, c:c + w] - m_dir) / (c * c)
    return _suppressed_square(diff)


def aagd(img, cell: int) -> np.ndarray:
    """Squared difference between the target-cell mean and the mean of
    the surrounding ring (``3*cell`` square minus the central cell)."""
    img = np.asarray(img)
    _check_cell(img, cell)
    h, w = img.shape
    c = cell
    outer = 3 * c
    padded = pad(np.asarray(img, dtype=np.float64), outer // 2, BorderPolicy.REPLICATE)
    s_outer = box_sums(padded, outer)
    s_inner = box_sums(padded, c)[c:c + h, c:c + w]
    # mean(inner) - mean(ring) = (9 * S_inner - S_outer) / (8 c^2)
    diff = (9.0 * s_inner - s_outer) / (8 * c * c)
    return diff * diff


def tophat(img, se_side: int = 7) -> np.ndarray:
    """White top-hat with a flat square element, clamped at zero."""
    img = np.asarray(img, dtype=np.float64)
    se = StructuringElement.square(se_side)
    return np.maximum(img - opening(img, se), 0.0)


def ms_log(img, sigmas=LOG_SIGMAS) -> np.ndarray:
    """Multi-scale LoG: pixelwise maximum of scale-normalized LoG
    responses over the 12-sigma grid, clamped at zero."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a non-empty 2-D image")
    out = reduce(np.maximum, (log_filter(img, s) for s in sigmas))
    return np.maximum(out, 0.0)


# ----------------------------------------------------------------------
# Multi-scale fusion
# ----------------------------------------------------------------------

def _default_workers() -> int:
    try:
        n = int(os.environ.get("ADMD_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def multiscale(detector, img, scales=DEFAULT_SCALES, parallel: bool = False,
               max_cell: int | None = MAX_CELL) -> np.ndarray:
    """Pixelwise maximum of ``detector(img, s)`` over the scale set.

    With ``parallel=True`` scales are evaluated on a thread pool capped
    by the ``ADMD_THREADS`` environment variable (0 or unset means one
    thread per CPU).  The result is identical to sequential evaluation.
    """
    scales = validate_scales(scales, max_cell)
    img = np.asarray(img)
    if parallel and len(scales) > 1:
        workers = min(_default_workers(), len(scales))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            maps = list(pool.map(lambda s: detector(img, s), scales))
    else:
        maps = [detector(img, s) for s in scales]
    return reduce(np.maximum, maps)


ALGORITHMS = ("aagd", "admd", "admd-eff", "tophat", "mslog")

_SINGLE_SCALE = {
    "aagd": aagd,
    "admd": admd_naive,
    "admd-eff": admd_efficient,
    "tophat": tophat,
}


def detect(algorithm: str, img, scales=DEFAULT_SCALES, parallel: bool = False) -> np.ndarray:
    """Run a detector by id over a scale set.

    ``scales`` are cell sizes for AAGD/ADMD and square element sides for
    Top-Hat; ``mslog`` ignores them and uses its fixed sigma grid.
    """
    if algorithm == "mslog":
        return ms_log(img)
    try:
        fn = _SINGLE_SCALE[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}") from None
    return multiscale(fn, img, scales, parallel=parallel)
