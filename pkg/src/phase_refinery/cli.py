"""Command-line front end.

Exit codes: 0 success, 1 some inputs failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .analysis import DEFAULT_BINS, DEFAULT_DROP_FRACTION, entropy_stability_study
from .core_types import ColorPolicy, RefineryConfig, RefineryError
from .domain_shift import reports_to_csv, run_seeds
from .pipeline import BatchInputError, ingest_image, refine_batch
from .spectral import build_frequency_grid, build_kernel, build_lowpass, export_array

WORKERS_ENV = "PHASE_REFINERY_WORKERS"

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _load_config(path) -> RefineryConfig:
    try:
        return RefineryConfig.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except RefineryError as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None


def cmd_refine(args) -> int:
    config = _load_config(args.config)
    workers = args.workers if args.workers is not None else _default_workers()
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    start = time.perf_counter()
    try:
        manifest = refine_batch(args.input, args.output, config, workers=workers)
    except BatchInputError as exc:
        raise UsageError(str(exc)) from None
    elapsed = max(time.perf_counter() - start, 1e-9)
    print(f"processed={manifest.processed} failed={manifest.failures} "
          f"throughput={manifest.total / elapsed:.6f} images/sec")
    for rec in manifest.records:
        if rec.error is not None:
            print(f"failed: {rec.input}: {rec.error}", file=sys.stderr)
    return EXIT_OK if manifest.failures == 0 else EXIT_PARTIAL


def cmd_analyze_illumination(args) -> int:
    config = _load_config(args.config)
    if args.bins < 2:
        raise UsageError("--bins must be >= 2")
    if not 0.0 < args.crop <= 1.0:
        raise UsageError("--crop must lie in (0, 1]")
    try:
        (image,) = ingest_image(args.image, ColorPolicy.LUMA)
    except RefineryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    report = entropy_stability_study(image, config, bins=args.bins, crop=args.crop,
                                     drop_fraction=args.drop_fraction)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv())
    flagged = [str(lv) for lv, f in zip(report.levels, report.flags) if f]
    print(f"raw_std={report.raw_std:.6f} refined_std={report.refined_std:.6f}")
    print(f"flagged_levels={','.join(flagged) if flagged else 'none'}")
    return EXIT_OK


def cmd_kernel_export(args) -> int:
    config = _load_config(args.config)
    if args.height < 2 or args.width < 2:
        raise UsageError("--height and --width must be >= 2")
    grid = build_frequency_grid(args.height, args.width)
    if args.what == "phase":
        arr = build_kernel(grid, config.kernel).values
    else:
        arr = build_lowpass(grid, config.kernel.sigma_lpf).values
    export_array(arr, args.out)
    print(f"wrote {args.what} {args.height}x{args.width} max={arr.max():.6f} to {args.out}")
    return EXIT_OK


def cmd_domain_shift(args) -> int:
    config = _load_config(args.config)
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    if args.per_domain_count < 50 or args.per_domain_count % 2:
        raise UsageError("--per-domain-count must be even and >= 50")
    reports = run_seeds(range(args.seeds), config, per_domain_count=args.per_domain_count)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(reports_to_csv(reports))
    for refined in (False, True):
        ood = np.array([r.ood_acc for r in reports if r.refined == refined])
        arm = "refined" if refined else "unrefined"
        print(f"{arm}: ood_mean={ood.mean():.6f} ood_std={ood.std():.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phase-refinery", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="refine a directory tree of images")
    p.add_argument("--input", required=True, metavar="DIR", help="input directory tree")
    p.add_argument("--output", required=True, metavar="DIR", help="output directory (mirrored tree + manifest.jsonl)")
    p.add_argument("--config", required=True, metavar="FILE", help="refinery config file")
    p.add_argument("--workers", type=int, default=None, metavar="N",
                   help=f"worker threads (default: ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("analyze-illumination", help="entropy under graded illumination")
    p.add_argument("--image", required=True, metavar="FILE", help="input image")
    p.add_argument("--config", required=True, metavar="FILE", help="refinery config file")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, metavar="N", help="histogram bins (default 256)")
    p.add_argument("--crop", type=float, default=1.0, metavar="F",
                   help="central fraction of each side analyzed (default 1.0)")
    p.add_argument("--drop-fraction", type=float, default=DEFAULT_DROP_FRACTION, metavar="F",
                   help="flag levels whose refined entropy falls below F x level 1 (default 0.5)")
    p.add_argument("--out", required=True, metavar="CSV", help="output CSV")
    p.set_defaults(func=cmd_analyze_illumination)

    p = sub.add_parser("kernel-export", help="dump a spectral kernel as raw float64")
    p.add_argument("--height", type=int, required=True, metavar="H", help="grid height")
    p.add_argument("--width", type=int, required=True, metavar="W", help="grid width")
    p.add_argument("--config", required=True, metavar="FILE", help="refinery config file")
    p.add_argument("--out", required=True, metavar="FILE", help="output file")
    p.add_argument("--what", choices=("phase", "lpf"), default="phase", help="phase kernel or low-pass gain")
    p.set_defaults(func=cmd_kernel_export)

    p = sub.add_parser("domain-shift", help="paired refined/unrefined surrogate OOD experiment")
    p.add_argument("--seeds", type=int, required=True, metavar="N", help="run seeds 0..N-1")
    p.add_argument("--config", required=True, metavar="FILE", help="refinery config file")
    p.add_argument("--out", required=True, metavar="CSV", help="output CSV")
    p.add_argument("--per-domain-count", type=int, default=100, metavar="N",
                   help="images per domain (default 100)")
    p.set_defaults(func=cmd_domain_shift)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
