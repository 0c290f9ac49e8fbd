"""Command-line front end.

Subcommands: ``solve`` (LMS fit of a points CSV), ``detect`` (lines in a PGM
image), ``synth`` (synthetic image + ground truth), ``experiment`` (accuracy
grids), ``bench`` (solver timing).  Exit codes: 0 success, 1 usage error,
2 unreadable or invalid input, 3 degenerate input.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .detect import METHOD_LMS, METHODS, detect_lines
from .experiments import (
    ExperimentConfig,
    run_bench,
    run_experiment,
    summarize,
    write_bench_csv,
    write_metrics_csv,
)
from .geometry import DegenerateInputError, InvalidInputError
from .hough import HoughParams
from .pgm import PgmParseError, read_pgm, write_pgm
from .solver import solve_lms
from .synth import SyntheticSpec, gen_synthetic, write_ground_truth

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BAD_INPUT = 2
EXIT_DEGENERATE = 3

FIT_HEADER = "slope,intercept,lms_value,slab_height,coverage"
DETECT_HEADER = "method,rho,theta,slope,intercept,lms_value,support_count"


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_points_csv(path) -> list[tuple[float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "y"]:
            raise InvalidInputError(f"{path}: expected header 'x,y', got {header!r}")
        try:
            return [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as exc:
            raise InvalidInputError(f"{path}: malformed point row: {exc}") from exc


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w")


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def cmd_solve(args) -> int:
    pts = _read_points_csv(args.input)
    fit = solve_lms(
        pts, args.q, backend=args.backend, workers=args.workers, materialize=args.materialize
    )
    out = _open_out(args.output)
    try:
        out.write(FIT_HEADER + "\n")
        out.write(
            f"{fit.line.slope!r},{fit.line.intercept!r},{fit.lms_value!r},"
            f"{fit.slab_height!r},{fit.coverage}\n"
        )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_detect(args) -> int:
    image = read_pgm(args.input)
    h, w = image.shape
    params = HoughParams.for_image(w, h, args.drho, args.dtheta)
    detections = detect_lines(
        image,
        params,
        args.method,
        args.max_peaks,
        threshold=args.threshold,
        min_votes=args.min_votes,
        q=args.q,
        backend=args.backend,
        workers=args.workers,
    )
    out = _open_out(args.output)
    try:
        out.write(DETECT_HEADER + "\n")
        for d in detections:
            out.write(
                f"{d.method},{d.rho!r},{d.theta!r},{d.slope!r},{d.intercept!r},"
                f"{_fmt(d.lms_value)},{len(d.support)}\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_synth(args) -> int:
    ep = (args.x0, args.y0, args.x1, args.y1)
    if any(v is not None for v in ep):
        if any(v is None for v in ep):
            raise InvalidInputError("endpoints need all of --x0 --y0 --x1 --y1")
        spec = SyntheticSpec(
            width=args.width, height=args.height, endpoints=((ep[0], ep[1]), (ep[2], ep[3])),
            sampling_prob=args.sampling, noise_prob=args.noise, seed=args.seed,
        )
    else:
        if args.slope is None or args.intercept is None:
            raise InvalidInputError("give either --slope/--intercept or all of --x0 --y0 --x1 --y1")
        spec = SyntheticSpec(
            width=args.width, height=args.height, slope=args.slope, intercept=args.intercept,
            sampling_prob=args.sampling, noise_prob=args.noise, seed=args.seed,
        )
    image, truth = gen_synthetic(spec)
    write_pgm(args.output, image)
    truth_path = args.truth or (args.output + ".truth.csv")
    write_ground_truth(truth_path, truth)
    return EXIT_OK


def cmd_experiment(args) -> int:
    seeds = tuple(int(s) for s in args.seeds.split(",")) if args.seeds else tuple(range(args.num_seeds))
    config = ExperimentConfig.preset(args.name, seeds)
    if args.noise:
        config = ExperimentConfig(
            name=config.name,
            seeds=config.seeds,
            noise_levels=tuple(float(v) for v in args.noise.split(",")),
            bins=config.bins,
            methods=config.methods,
        )
    rows = run_experiment(config, backend=args.backend, workers=args.workers)
    write_metrics_csv(args.output, rows)
    if args.summary:
        cells = summarize(rows)
        with open(args.summary, "w") as fh:
            fh.write(
                "noiseProb,deltaRho,deltaTheta,method,meanSlopeErrorPct,stdSlopeErrorPct,"
                "meanPixelSeparationError,stdPixelSeparationError,cases\n"
            )
            for c in cells:
                fh.write(
                    f"{c['noiseProb']!r},{c['deltaRho']!r},{c['deltaTheta']!r},{c['method']},"
                    f"{c['meanSlopeErrorPct']!r},{c['stdSlopeErrorPct']!r},"
                    f"{c['meanPixelSeparationError']!r},{c['stdPixelSeparationError']!r},{c['cases']}\n"
                )
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    backends = tuple(args.backends.split(","))
    rows = run_bench(
        sizes, backends, args.repeats,
        workers=args.workers, materialize=args.materialize, seed=args.seed,
    )
    write_bench_csv(args.output, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lmsline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[], help="exact LMS fit of an x,y CSV")
    p.add_argument("--input", required=True, help="points CSV with header x,y")
    p.add_argument("--output", default=None, help="fit CSV (default stdout)")
    p.add_argument("--q", type=int, default=None, help="coverage rank (default majority)")
    p.add_argument("--backend", choices=["seq", "par"], default="seq")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--materialize", action="store_true", help="store all pair intersections up front")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("detect", help="detect lines in a PGM image")
    p.add_argument("--input", required=True, help="binary P5 PGM image")
    p.add_argument("--output", default=None, help="detections CSV (default stdout)")
    p.add_argument("--drho", type=float, default=20.0)
    p.add_argument("--dtheta", type=float, default=20.0)
    p.add_argument("--method", choices=list(METHODS), default=METHOD_LMS)
    p.add_argument("--max-peaks", type=int, default=1)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("--min-votes", type=int, default=2)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--backend", choices=["seq", "par"], default="seq")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="generate a synthetic line image")
    p.add_argument("--output", required=True, help="PGM path to write")
    p.add_argument("--truth", default=None, help="ground-truth CSV (default <output>.truth.csv)")
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=1024)
    p.add_argument("--slope", type=float, default=None)
    p.add_argument("--intercept", type=float, default=None)
    p.add_argument("--x0", type=int, default=None)
    p.add_argument("--y0", type=int, default=None)
    p.add_argument("--x1", type=int, default=None)
    p.add_argument("--y1", type=int, default=None)
    p.add_argument("--sampling", type=float, default=0.5)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("experiment", help="run an accuracy grid")
    p.add_argument("--name", choices=["resolution", "noise"], required=True)
    p.add_argument("--output", required=True, help="metrics CSV")
    p.add_argument("--summary", default=None, help="optional per-cell summary CSV")
    p.add_argument("--seeds", default=None, help="comma-separated seed list")
    p.add_argument("--num-seeds", type=int, default=20)
    p.add_argument("--noise", default=None, help="override noise levels, comma-separated")
    p.add_argument("--backend", choices=["seq", "par"], default="seq")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="time the exact solver")
    p.add_argument("--output", required=True, help="timings CSV")
    p.add_argument("--sizes", default="64,128,256,512")
    p.add_argument("--backends", default="seq,par")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--materialize", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DegenerateInputError as exc:
        print(f"lmsline: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InvalidInputError, PgmParseError) as exc:
        print(f"lmsline: invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as exc:
        print(f"lmsline: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
