"""Detection metrics: signal-to-clutter ratio, background suppression
factor and the false-alarm-rate versus threshold curve."""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imagecore import normalize_to_255

__all__ = [
    "Box",
    "GroundTruth",
    "PfaCurve",
    "scr",
    "bsf",
    "pfa_curve",
    "target_mask",
    "EXCLUSION_MARGIN",
    "SCR_RING",
]

# non-target area excludes targets grown by this many pixels
EXCLUSION_MARGIN = 2
# local background ring width for SCR
SCR_RING = 20


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; ``(x, y)`` is the top-left pixel."""

    x: int
    y: int
    w: int
    h: int

    def inflate(self, m: int) -> Box:
        return Box(self.x - m, self.y - m, self.w + 2 * m, self.h + 2 * m)

    def clip(self, width: int, height: int) -> Box:
        x0, y0 = max(self.x, 0), max(self.y, 0)
        x1, y1 = min(self.x + self.w, width), min(self.y + self.h, height)
        return Box(x0, y0, max(x1 - x0, 0), max(y1 - y0, 0))

    def slices(self, shape) -> tuple[slice, slice]:
        b = self.clip(shape[1], shape[0])
        return slice(b.y, b.y + b.h), slice(b.x, b.x + b.w)

    def contains(self, x: int, y: int) -> bool:
        return self.x <= x < self.x + self.w and self.y <= y < self.y + self.h


@dataclass
class GroundTruth:
    targets: list

    def __post_init__(self):
        self.targets = [t if isinstance(t, Box) else Box(**t) for t in self.targets]
        for t in self.targets:
            if t.w < 1 or t.h < 1:
                raise ValueError(f"target box {t} has a zero side")

    def validate(self, shape) -> None:
        """Check the boxes lie inside an image of ``shape`` and do not overlap."""
        height, width = shape
        for t in self.targets:
            if t.clip(width, height) != t:
                raise ValueError(f"target box {t} extends outside the {width}x{height} image")
        counts = np.zeros(shape, dtype=np.int32)
        for t in self.targets:
            counts[t.slices(shape)] += 1
        if (counts > 1).any():
            raise ValueError("target boxes overlap")

    @classmethod
    def from_json(cls, text: str) -> GroundTruth:
        doc = json.loads(text)
        return cls([Box(int(t["x"]), int(t["y"]), int(t["w"]), int(t["h"]))
                    for t in doc["targets"]])

    @classmethod
    def load(cls, path) -> GroundTruth:
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps({"targets": [vars(t) for t in self.targets]})

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def __len__(self):
        return len(self.targets)


def target_mask(shape, gt: GroundTruth, margin: int = EXCLUSION_MARGIN) -> np.ndarray:
    """Boolean mask of all target boxes grown by ``margin`` pixels."""
    mask = np.zeros(shape, dtype=bool)
    for t in gt.targets:
        mask[t.inflate(margin).slices(shape)] = True
    return mask


def scr(img, gt: GroundTruth, ring: int = SCR_RING) -> list[float]:
    """Signal-to-clutter ratio ``(f_T - f_b) / sigma_b`` for each target.

    ``f_T`` is the mean inside the box; ``f_b`` and ``sigma_b`` are the
    mean and standard deviation of the surrounding ring (box grown by
    ``ring`` pixels, minus the box, clipped to the image).  A constant
    ring yields the ``inf`` sentinel and a warning.
    """
    img = np.asarray(img, dtype=np.float64)
    if not gt.targets:
        raise ValueError("SCR needs at least one target")
    out = []
    for t in gt.targets:
        inner = np.zeros(img.shape, dtype=bool)
        inner[t.slices(img.shape)] = True
        outer = np.zeros(img.shape, dtype=bool)
        outer[t.inflate(ring).slices(img.shape)] = True
        background = img[outer & ~inner]
        f_t = img[inner].mean()
        f_b, sigma_b = background.mean(), background.std()
        if sigma_b == 0:
            warnings.warn(f"constant background ring around {t}; SCR is unbounded",
                          RuntimeWarning, stacklevel=2)
            out.append(float("inf"))
        else:
            out.append(float((f_t - f_b) / sigma_b))
    return out


def bsf(input_img, saliency, gt: GroundTruth, margin: int = EXCLUSION_MARGIN) -> float:
    """Background suppression factor ``sigma_in / sigma_out``.

    Both deviations are taken over the non-target area (pixels outside
    every box grown by ``margin``); ``sigma_out`` is measured on the
    saliency map rescaled to ``[0, 255]``.  Perfect suppression
    (``sigma_out == 0``) returns ``inf``.
    """
    input_img = np.asarray(input_img, dtype=np.float64)
    saliency = np.asarray(saliency, dtype=np.float64)
    if input_img.shape != saliency.shape:
        raise ValueError("input and saliency shapes differ")
    keep = ~target_mask(input_img.shape, gt, margin)
    sigma_in = input_img[keep].std()
    sigma_out = normalize_to_255(saliency)[keep].std()
    if sigma_out == 0:
        warnings.warn("saliency is constant over the non-target area; BSF is unbounded",
                      RuntimeWarning, stacklevel=2)
        return float("inf")
    return float(sigma_in / sigma_out)


@dataclass
class PfaCurve:
    thresholds: np.ndarray
    pfa: np.ndarray

    def points(self):
        return list(zip(self.thresholds.tolist(), self.pfa.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["threshold", "pfa"])
        for t, p in self.points():
            writer.writerow([t, repr(p)])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def pfa_curve(saliency, gt: GroundTruth, margin: int = EXCLUSION_MARGIN) -> PfaCurve:
    """False-alarm rate at every integer threshold 0..255.

    The saliency map is rescaled to ``[0, 255]``; a false alarm is a
    pixel strictly above the threshold outside the grown target boxes,
    and the rate is their count over the total pixel count.
    """
    norm = normalize_to_255(saliency)
    values = np.sort(norm[~target_mask(norm.shape, gt, margin)])
    thresholds = np.arange(256)
    # count of values > t
    exceed = values.size - np.searchsorted(values, thresholds, side="right")
    return PfaCurve(thresholds, exceed / norm.size)
