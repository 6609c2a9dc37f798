"""Wall-clock benchmark harness for the detectors.

Each detector call is timed end to end after a few untimed warm-up
calls; the report keeps mean, standard deviation and minimum in
milliseconds.  Every output is checksummed so the work cannot be elided
and so timed and untimed runs can be checked for identical results.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .detectors import DEFAULT_SCALES, detect

__all__ = ["BenchEntry", "BenchReport", "run_bench", "default_bench_image", "COLUMNS"]

COLUMNS = ("algorithm", "scales", "width", "height", "reps", "mean_ms", "std_ms", "min_ms")
WARMUP = 3
# the strip size used for the published timings
DEFAULT_SHAPE = (288, 5600)


@dataclass
class BenchEntry:
    algorithm: str
    scales: str
    width: int
    height: int
    reps: int
    mean_ms: float = float("nan")
    std_ms: float = float("nan")
    min_ms: float = float("nan")
    checksum: str = ""
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class BenchReport:
    entries: list = field(default_factory=list)

    def find(self, algorithm: str, scales: str | None = None) -> BenchEntry:
        for e in self.entries:
            if e.algorithm == algorithm and (scales is None or e.scales == scales):
                return e
        raise KeyError((algorithm, scales))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for e in self.entries:
            writer.writerow([getattr(e, c) if not c.endswith("_ms") else f"{getattr(e, c):.3f}"
                             for c in COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"entries": [asdict(e) for e in self.entries]}, indent=2)

    def to_table(self) -> str:
        lines = [f"{'algorithm':<14}{'scales':<10}{'size':>11}{'reps':>6}"
                 f"{'mean ms':>11}{'std ms':>10}{'min ms':>11}"]
        for e in self.entries:
            size = f"{e.height}x{e.width}"
            if e.ok:
                lines.append(f"{e.algorithm:<14}{e.scales:<10}{size:>11}{e.reps:>6}"
                             f"{e.mean_ms:>11.3f}{e.std_ms:>10.3f}{e.min_ms:>11.3f}")
            else:
                lines.append(f"{e.algorithm:<14}{e.scales:<10}{size:>11}  error: {e.error}")
        return "\n".join(lines)


def _checksum(arr: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(arr).tobytes()).hexdigest()


def default_bench_image(seed: int = 0, shape=DEFAULT_SHAPE) -> np.ndarray:
    """Uniform 8-bit-valued noise image of the default benchmark size."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, shape).astype(np.float32)


def _time_one(fn, img, reps: int, warmup: int):
    ref = None
    for _ in range(warmup):
        ref = _checksum(fn(img))
    times = []
    sums = set()
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn(img)
        times.append((time.perf_counter() - t0) * 1e3)
        sums.add(_checksum(out))
    if len(sums) != 1 or (ref is not None and ref not in sums):
        raise RuntimeError("detector output changed between runs")
    return times, sums.pop()


def run_bench(algorithms, img, reps: int = 100, warmup: int = WARMUP,
              parallel: bool = False) -> BenchReport:
    """Time each algorithm on ``img``.

    ``algorithms`` is a list of ``(id, scales)`` pairs, or bare ids which
    use the default scale set.  ``scales`` may be a single int for a
    single-scale run.  A failing detector is recorded as an error entry
    and does not stop the rest of the suite.  With ``parallel=True`` a
    second, ``+par``-suffixed entry is timed with multi-scale fusion on a
    thread pool.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("benchmark image must be a non-empty 2-D array")
    height, width = img.shape
    report = BenchReport()
    modes = [False, True] if parallel else [False]
    for item in algorithms:
        alg, scales = (item, DEFAULT_SCALES) if isinstance(item, str) else item
        scales = (scales,) if isinstance(scales, int) else tuple(scales)
        label = "-" if alg == "mslog" else ",".join(map(str, scales))
        for par in modes:
            entry = BenchEntry(alg + ("+par" if par else ""), label, width, height, reps)
            try:
                times, entry.checksum = _time_one(
                    lambda x: detect(alg, x, scales, parallel=par), img, reps, warmup)
            except Exception as exc:  # noqa: BLE001 -- reported per entry
                entry.error = f"{type(exc).__name__}: {exc}"
            else:
                entry.mean_ms = statistics.fmean(times)
                entry.std_ms = statistics.pstdev(times)
                entry.min_ms = min(times)
            report.entries.append(entry)
    return report
