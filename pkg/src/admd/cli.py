"""Command-line interface: ``admd {detect,eval,synth,noise-sim,bench}``.

Results go to stdout (JSON or CSV), diagnostics to stderr.  Exit codes:
0 success, 1 runtime or I/O failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bench, synth
from .detectors import ALGORITHMS, DEFAULT_SCALES, detect, validate_scales
from .imagecore import ImageFormatError, load_image, save_normalized, save_pgm, save_png, save_raw
from .metrics import GroundTruth, bsf, pfa_curve, scr


class ConfigError(Exception):
    """Invalid flags or configuration (exit code 2)."""


def _scales(text: str) -> tuple:
    try:
        return validate_scales(int(s) for s in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _algorithms(text: str) -> list:
    algs = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in algs if a not in ALGORITHMS]
    if not algs or bad:
        raise argparse.ArgumentTypeError(
            f"invalid algorithm(s) {bad or text!r}; choose from {', '.join(ALGORITHMS)}")
    return algs


def _write_image(img, path) -> None:
    """Write a scene image; ``.raw`` is lossless, PGM/PNG are rounded."""
    suffix = Path(path).suffix.lower()
    if suffix == ".raw":
        save_raw(img, path)
    elif suffix in (".pgm", ".pnm"):
        save_pgm(img, path)
    else:
        save_png(img, path)


def _peak(saliency) -> dict:
    y, x = np.unravel_index(int(np.argmax(saliency)), saliency.shape)
    return {"x": int(x), "y": int(y), "value": float(saliency[y, x])}


def _finite_or_str(v: float):
    return v if np.isfinite(v) else str(v)


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_detect(args) -> int:
    img = load_image(args.input)
    sal = detect(args.alg[0], img, args.scales, parallel=args.parallel)
    save_normalized(sal, args.output)
    if args.raw_out:
        save_raw(sal, args.raw_out)
    print(json.dumps({"algorithm": args.alg[0], "peak": _peak(sal)}))
    return 0


def cmd_eval(args) -> int:
    if not args.gt:
        raise ConfigError("--gt is required")
    if not Path(args.gt).is_file():
        raise ConfigError(f"ground-truth file not found: {args.gt}")
    try:
        gt = GroundTruth.load(args.gt)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed ground truth: {exc}") from None
    img = load_image(args.input)
    try:
        gt.validate(img.shape)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not gt.targets:
        raise ConfigError("ground truth lists no targets")

    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for alg in args.alg:
            sal = detect(alg, img, args.scales, parallel=args.parallel)
            curve = pfa_curve(sal, gt)
            results.append({
                "algorithm": alg,
                "scales": list(args.scales) if alg != "mslog" else None,
                "peak": _peak(sal),
                "scr": [_finite_or_str(v) for v in scr(sal, gt)],
                "bsf": _finite_or_str(bsf(img, sal, gt)),
                "pfa": curve.pfa.tolist(),
            })
            if out_dir:
                curve.save_csv(out_dir / f"{alg}_pfa.csv")
    if out_dir:
        (out_dir / "metrics.json").write_text(json.dumps({"results": results}, indent=2) + "\n")

    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["algorithm", "target", "scr", "bsf"])
        for r in results:
            for i, v in enumerate(r["scr"]):
                writer.writerow([r["algorithm"], i, v, r["bsf"]])
        sys.stdout.write(buf.getvalue())
    else:
        print(json.dumps({"results": results}))
    return 0


def cmd_synth(args) -> int:
    try:
        doc = json.loads(Path(args.spec).read_text())
        if not isinstance(doc, dict):
            raise ValueError("scene spec must be a JSON object")
        spec = synth.SceneSpec.from_dict(doc)
        if args.seed is not None:
            spec.rng_seed = args.seed
        img, gt = synth.render(spec)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed scene spec: {exc}") from None
    _write_image(img, args.out)
    if args.gt:
        gt.save(args.gt)
    print(json.dumps({"width": spec.width, "height": spec.height,
                      "targets": json.loads(gt.to_json())["targets"]}))
    return 0


def cmd_noise_sim(args) -> int:
    params = [float(p) for p in range(1, 11)] if args.sweep else [args.param]
    rows = []
    for dist in synth.NOISE_KINDS:
        for p in params:
            noise = synth.NoiseSpec(dist, p)
            for alg in synth.MC_ALGORITHMS:
                mean, var = synth.noise_mc_1d(alg, noise, args.trials, args.cell,
                                              3 * args.cell, args.seed)
                rows.append({"algorithm": alg, "distribution": dist, "parameter": p,
                             "trials": args.trials, "mean": mean, "variance": var})
    if args.format == "json":
        text = json.dumps({"rows": rows}) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    img = load_image(args.input) if args.input else bench.default_bench_image(args.seed)
    algs = [(a, args.scales) for a in args.alg]
    report = bench.run_bench(algs, img, reps=args.reps, warmup=args.warmup,
                             parallel=args.parallel)
    print(report.to_table(), file=sys.stderr)
    text = report.to_json() + "\n" if args.format == "json" else report.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if all(e.ok for e in report.entries) else 1


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="admd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, many=False):
        p.add_argument("--alg", type=_algorithms, default=["admd-eff"],
                       help="detector id" + (", or a comma list" if many else ""))
        p.add_argument("--scales", type=_scales, default=DEFAULT_SCALES,
                       help="comma-separated odd cell sizes (default 3,5,7,9)")
        p.add_argument("--parallel", action="store_true",
                       help="evaluate scales on a thread pool (ADMD_THREADS caps it)")

    p = sub.add_parser("detect", help="write a saliency map and report its peak")
    common(p)
    p.add_argument("input")
    p.add_argument("output", help="normalized 8-bit saliency image (.png or .pgm)")
    p.add_argument("--raw-out", help="also write the float32 raw dump here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="SCR, BSF and Pfa curve against ground truth")
    common(p, many=True)
    p.add_argument("input")
    p.add_argument("--gt", help="ground-truth JSON")
    p.add_argument("--out", help="directory for metrics.json and <alg>_pfa.csv")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthetic scene from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="image path (.raw, .pgm or .png)")
    p.add_argument("--gt", help="write ground-truth JSON here")
    p.add_argument("--seed", type=int, help="override the spec's noise seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("noise-sim", help="1-D noise-response Monte Carlo")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--cell", type=int, default=9)
    p.add_argument("--param", type=float, default=3.0, help="noise parameter (default 3)")
    p.add_argument("--sweep", action="store_true", help="sweep the noise parameter over 1..10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_noise_sim)

    p = sub.add_parser("bench", help="time detectors")
    p.add_argument("input", nargs="?", help="image (default: 288x5600 noise)")
    p.add_argument("--alg", type=_algorithms, default=list(ALGORITHMS))
    p.add_argument("--scales", type=_scales, default=DEFAULT_SCALES)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--warmup", type=int, default=bench.WARMUP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    if getattr(args, "trials", 1) < 1 or getattr(args, "reps", 1) < 1:
        parser.error("--trials and --reps must be at least 1")
    if args.command == "detect" and len(args.alg) != 1:
        parser.error("detect takes a single --alg")
    if args.command == "noise-sim":
        if args.cell < 1 or args.cell % 2 == 0 or 3 * args.cell > synth.SIGNAL_LENGTH:
            parser.error(f"--cell must be odd and at most {synth.SIGNAL_LENGTH // 3}")
        if not args.param > 0:
            parser.error("--param must be positive")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"admd: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ImageFormatError) as exc:
        print(f"admd: I/O error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # detector preconditions (e.g. image smaller than the window)
        print(f"admd: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
