"""Synthetic test scenes and the 1-D noise-response Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import Box, GroundTruth

__all__ = [
    "NoiseSpec",
    "StepEdge",
    "GaussianTarget",
    "RectTarget",
    "SceneSpec",
    "render",
    "detection_scene",
    "gen_noise",
    "noise_mc_1d",
    "evaluate_1d",
    "MC_ALGORITHMS",
    "SIGNAL_LENGTH",
]

NOISE_KINDS = ("gaussian", "poisson", "rayleigh")
MC_ALGORITHMS = ("AAGD", "ADMD", "ADMD+")
# 7 cells of 9 samples: centre window, two flanking cells, two margin cells each side
SIGNAL_LENGTH = 63
_MC_CHUNK = 10_000


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise: ``gaussian`` (sigma, zero mean), ``poisson``
    (lambda, not mean-subtracted) or ``rayleigh`` (scale)."""

    distribution: str = "gaussian"
    param: float = 3.0

    def __post_init__(self):
        if self.distribution not in NOISE_KINDS:
            raise ValueError(f"unknown noise distribution {self.distribution!r}")
        if not (math.isfinite(self.param) and self.param > 0):
            raise ValueError("noise parameter must be positive")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.distribution == "gaussian":
            return rng.normal(0.0, self.param, size)
        if self.distribution == "poisson":
            return rng.poisson(self.param, size).astype(np.float64)
        return rng.rayleigh(self.param, size)


def gen_noise(dist: NoiseSpec, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. samples of ``dist``, deterministic for a given seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return dist.sample(np.random.default_rng(seed), n)


# ----------------------------------------------------------------------
# Scenes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class StepEdge:
    """Straight two-level edge: pixels at or beyond ``position`` (column
    for ``vertical``, row for ``horizontal``) take ``level``."""

    orientation: str
    position: int
    level: float


@dataclass(frozen=True)
class GaussianTarget:
    x: float
    y: float
    sigma: float
    amplitude: float

    def bbox(self) -> Box:
        r = max(1, math.ceil(2 * self.sigma))
        x0, y0 = math.floor(self.x) - r, math.floor(self.y) - r
        return Box(x0, y0, 2 * r + 1, 2 * r + 1)


@dataclass(frozen=True)
class RectTarget:
    x: int
    y: int
    w: int
    h: int
    amplitude: float

    def bbox(self) -> Box:
        return Box(self.x, self.y, self.w, self.h)


@dataclass
class SceneSpec:
    width: int
    height: int
    background: float = 0.0
    elements: list = field(default_factory=list)
    noise: NoiseSpec | None = None
    rng_seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> SceneSpec:
        """Parse the JSON scene format used by ``admd synth``.

        Short keys ``w``, ``h``, ``bg`` are accepted for width, height
        and background.
        """
        try:
            width = int(d.get("width", d.get("w")))
            height = int(d.get("height", d.get("h")))
        except (TypeError, ValueError):
            raise ValueError("scene needs integer width/w and height/h") from None
        elements = []
        for e in d.get("elements", []):
            kind = e.get("type")
            if kind == "step":
                elements.append(StepEdge(e.get("orientation", "vertical"),
                                         int(e["position"]), float(e["level"])))
            elif kind == "gaussian":
                elements.append(GaussianTarget(float(e["x"]), float(e["y"]),
                                               float(e["sigma"]), float(e["amplitude"])))
            elif kind == "rect":
                elements.append(RectTarget(int(e["x"]), int(e["y"]), int(e["w"]),
                                           int(e["h"]), float(e["amplitude"])))
            else:
                raise ValueError(f"unknown scene element type {kind!r}")
        noise = d.get("noise")
        if noise is not None:
            noise = NoiseSpec(noise.get("distribution", "gaussian"), float(noise["param"]))
        return cls(width, height, float(d.get("background", d.get("bg", 0.0))),
                   elements, noise, int(d.get("seed", d.get("rng_seed", 0))))


def _check_element(e, width: int, height: int) -> None:
    if isinstance(e, StepEdge):
        limit = {"vertical": width, "horizontal": height}.get(e.orientation)
        if limit is None:
            raise ValueError(f"unknown edge orientation {e.orientation!r}")
        if not 0 <= e.position <= limit:
            raise ValueError(f"edge position {e.position} outside the image")
        values = (e.level,)
    elif isinstance(e, GaussianTarget):
        if not (0 <= e.x < width and 0 <= e.y < height):
            raise ValueError(f"Gaussian target centre ({e.x}, {e.y}) outside the image")
        if not e.sigma > 0:
            raise ValueError("Gaussian target sigma must be positive")
        values = (e.x, e.y, e.sigma, e.amplitude)
    elif isinstance(e, RectTarget):
        b = e.bbox()
        if b.w < 1 or b.h < 1 or b.x < 0 or b.y < 0 or b.x + b.w > width or b.y + b.h > height:
            raise ValueError(f"rectangle target {b} outside the image")
        values = (e.amplitude,)
    else:
        raise TypeError(f"unsupported scene element {e!r}")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("scene element values must be finite")


def render(spec: SceneSpec) -> tuple[np.ndarray, GroundTruth]:
    """Draw a scene and return ``(image, ground_truth)``.

    The background is filled first, step edges overwrite their bright
    half-plane, targets are added on top and noise is added last.
    Ground truth holds the bounding box of every target element
    (Gaussian targets: centre +- ceil(2 sigma), clipped to the image).
    """
    if spec.width < 1 or spec.height < 1:
        raise ValueError("scene dimensions must be positive")
    if not math.isfinite(spec.background):
        raise ValueError("background must be finite")
    for e in spec.elements:
        _check_element(e, spec.width, spec.height)

    img = np.full((spec.height, spec.width), spec.background, dtype=np.float64)
    yy, xx = np.mgrid[:spec.height, :spec.width]
    boxes = []
    for e in spec.elements:
        if isinstance(e, StepEdge):
            if e.orientation == "vertical":
                img[:, e.position:] = e.level
            else:
                img[e.position:, :] = e.level
    for e in spec.elements:
        if isinstance(e, GaussianTarget):
            r2 = (xx - e.x) ** 2 + (yy - e.y) ** 2
            img += e.amplitude * np.exp(-r2 / (2 * e.sigma ** 2))
            boxes.append(e.bbox().clip(spec.width, spec.height))
        elif isinstance(e, RectTarget):
            b = e.bbox()
            img[b.y:b.y + b.h, b.x:b.x + b.w] += e.amplitude
            boxes.append(b)
    if spec.noise is not None:
        rng = np.random.default_rng(spec.rng_seed)
        img += spec.noise.sample(rng, img.shape)
    return img.astype(np.float32), GroundTruth(boxes)


def detection_scene(seed: int, size: int = 128, noise_sigma: float = 3.0,
                    snr_range=(6.0, 10.0)) -> SceneSpec:
    """Random step-edge scene with one planted Gaussian target.

    The edge (vertical or horizontal, contrast 60..120 over a 40..80
    background) crosses the middle third of the frame; the target has
    sigma 1..2 and an amplitude of ``snr_range`` times the Gaussian
    noise sigma, and sits at least 15 px from the edge and 16 px from
    the border.
    """
    rng = np.random.default_rng(seed)
    orientation = str(rng.choice(["vertical", "horizontal"]))
    position = int(rng.integers(size // 3, 2 * size // 3))
    dark = float(rng.uniform(40, 80))
    bright = dark + float(rng.uniform(60, 120))
    while True:
        x, y = (float(v) for v in rng.uniform(16, size - 16, 2))
        if abs((x if orientation == "vertical" else y) - position) > 14:
            break
    target = GaussianTarget(x, y, float(rng.uniform(1.0, 2.0)),
                            float(rng.uniform(*snr_range)) * noise_sigma)
    return SceneSpec(size, size, dark, [StepEdge(orientation, position, bright), target],
                     NoiseSpec("gaussian", noise_sigma), seed)


# ----------------------------------------------------------------------
# 1-D noise Monte Carlo
# ----------------------------------------------------------------------

def evaluate_1d(algorithm: str, signals, cell: int = 9, aagd_bg: int = 27) -> np.ndarray:
    """Evaluate a 1-D detector at the centre sample of each row of ``signals``.

    ``AAGD`` is the squared gap between the central cell mean and the
    mean of the ``aagd_bg - cell`` flanking samples.  ``ADMD`` takes the
    smaller of the squared gaps to the left and right neighbour cells;
    ``ADMD+`` additionally zeroes a direction whose gap is negative.
    """
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    n = signals.shape[1]
    if cell < 1 or cell % 2 == 0:
        raise ValueError("cell must be a positive odd integer")
    if aagd_bg != 3 * cell:
        raise ValueError("the AAGD background window must be 3 cells long")
    if n < 3 * cell:
        raise ValueError(f"signal length {n} is shorter than 3 cells")
    mid, r = n // 2, cell // 2
    centre = signals[:, mid - r:mid + r + 1].mean(axis=1)
    left = signals[:, mid - cell - r:mid - cell + r + 1].mean(axis=1)
    right = signals[:, mid + cell - r:mid + cell + r + 1].mean(axis=1)
    if algorithm == "AAGD":
        return (centre - 0.5 * (left + right)) ** 2
    gaps = np.stack([centre - left, centre - right])
    if algorithm == "ADMD":
        return (gaps ** 2).min(axis=0)
    if algorithm == "ADMD+":
        return np.where(gaps >= 0, gaps ** 2, 0.0).min(axis=0)
    raise ValueError(f"unknown 1-D algorithm {algorithm!r}")


def noise_mc_1d(algorithm: str, dist: NoiseSpec, trials: int = 100_000, cell: int = 9,
                aagd_bg: int = 27, seed: int = 0) -> tuple[float, float]:
    """Mean and variance of a 1-D detector's response to pure noise.

    Each trial draws an independent noise signal of
    :data:`SIGNAL_LENGTH` samples and evaluates the detector at its
    centre.  Trials are drawn in fixed-size chunks, chunk ``i`` seeded
    with ``(seed, i)``, so the result depends only on the arguments.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if SIGNAL_LENGTH < 3 * cell:
        raise ValueError(f"cell {cell} too large for {SIGNAL_LENGTH}-sample signals")
    outputs = []
    for i, start in enumerate(range(0, trials, _MC_CHUNK)):
        rng = np.random.default_rng([seed, i])
        count = min(_MC_CHUNK, trials - start)
        signals = dist.sample(rng, (count, SIGNAL_LENGTH))
        outputs.append(evaluate_1d(algorithm, signals, cell, aagd_bg))
    out = np.concatenate(outputs)
    return float(out.mean()), float(out.var())
