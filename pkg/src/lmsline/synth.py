"""Deterministic synthetic test images: one rasterized line plus salt noise.

Generation is reproducible from a single integer seed.  Two independent
PCG64 streams are derived from it - ``SeedSequence([seed, 0])`` drives pixel
sampling along the line, ``SeedSequence([seed, 1])`` drives the noise field -
so changing the noise level never moves the sampled line pixels and vice
versa.  Noise is drawn over the full frame and then every raster cell of the
line (kept or not) is masked out, so the recorded line and noise pixel sets
are disjoint by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import InvalidInputError
from .hough import line_to_polar

FOREGROUND = 255


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic image.

    The line is given either as integer ``endpoints`` (inclusive, inside the
    frame) or as a ``slope``/``intercept`` pair in pixel coordinates, which
    is clipped to the frame; exactly one form must be supplied.
    ``sampling_prob`` keeps each raster pixel independently;
    ``noise_prob`` lights each off-line pixel independently.
    """

    width: int = 1024
    height: int = 1024
    endpoints: tuple[tuple[int, int], tuple[int, int]] | None = None
    slope: float | None = None
    intercept: float | None = None
    sampling_prob: float = 0.5
    noise_prob: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("image dimensions must be positive")
        if not (0.0 <= self.sampling_prob <= 1.0 and 0.0 <= self.noise_prob <= 1.0):
            raise InvalidInputError("probabilities must lie in [0, 1]")
        by_endpoints = self.endpoints is not None
        by_equation = self.slope is not None or self.intercept is not None
        if by_endpoints == by_equation:
            raise InvalidInputError("give either endpoints or slope/intercept, not both")
        if by_equation:
            if self.slope is None or self.intercept is None:
                raise InvalidInputError("slope and intercept must be given together")
            if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
                raise InvalidInputError("slope and intercept must be finite")


@dataclass(frozen=True)
class GroundTruth:
    """What was actually drawn: line parameters and exact pixel sets.

    ``slope``/``intercept`` describe ``y = slope*x + intercept`` in pixel
    coordinates (``slope = +-inf`` and ``intercept = nan`` for a vertical
    line); ``rho``/``theta`` are the same line in normal form, theta in
    degrees.  ``line_pixels`` are the raster pixels kept after sampling,
    ``noise_pixels`` the lit off-line pixels, both as ``(x, y)`` tuples.
    """

    slope: float
    intercept: float
    rho: float
    theta: float
    endpoints: tuple[tuple[int, int], tuple[int, int]]
    raster_length: int
    line_pixels: tuple[tuple[int, int], ...]
    noise_pixels: tuple[tuple[int, int], ...]
    seed: int


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Integer raster of the segment from ``(x0, y0)`` to ``(x1, y1)``,
    endpoints included, in walk order.  Works in all octants."""
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = []
    x, y = x0, y0
    while True:
        out.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return out


def _iround(v: float) -> int:
    return int(math.floor(v + 0.5))


def _clip_equation(spec: SyntheticSpec) -> tuple[tuple[int, int], tuple[int, int]]:
    """Integer endpoints of ``y = slope*x + intercept`` clipped to the frame."""
    s, c = float(spec.slope), float(spec.intercept)
    w, h = spec.width, spec.height
    if s == 0.0:
        if not 0.0 <= c <= h - 1:
            raise InvalidInputError("line does not cross the image")
        lo, hi = 0.0, float(w - 1)
    else:
        ya, yb = -c / s, (h - 1 - c) / s
        lo, hi = max(0.0, min(ya, yb)), min(float(w - 1), max(ya, yb))
    x0 = math.ceil(lo - 1e-9)
    x1 = math.floor(hi + 1e-9)
    if x0 > x1:
        raise InvalidInputError("line does not cross the image")
    y0 = min(max(_iround(s * x0 + c), 0), h - 1)
    y1 = min(max(_iround(s * x1 + c), 0), h - 1)
    return (x0, y0), (x1, y1)


def gen_synthetic(spec: SyntheticSpec) -> tuple[np.ndarray, GroundTruth]:
    """Render the image described by ``spec``.

    Returns the uint8 image (shape ``(height, width)``, foreground 255) and
    the exact ground truth.  Calling twice with equal specs yields identical
    arrays.
    """
    w, h = spec.width, spec.height
    if spec.endpoints is not None:
        (x0, y0), (x1, y1) = spec.endpoints
        for x, y in ((x0, y0), (x1, y1)):
            if not (0 <= x < w and 0 <= y < h):
                raise InvalidInputError(f"endpoint ({x}, {y}) outside {w}x{h} image")
        if (x0, y0) == (x1, y1):
            raise InvalidInputError("endpoints must be distinct")
        if x0 == x1:
            slope, intercept = math.inf, math.nan
            rho, theta = float(x0), 0.0
        else:
            slope = (y1 - y0) / (x1 - x0)
            intercept = y0 - slope * x0
            rho, theta = line_to_polar(slope, intercept)
    else:
        (x0, y0), (x1, y1) = _clip_equation(spec)
        slope, intercept = float(spec.slope), float(spec.intercept)
        rho, theta = line_to_polar(slope, intercept)
    raster = bresenham(x0, y0, x1, y1)

    rng_sample = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 0])))
    rng_noise = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 1])))

    keep = rng_sample.random(len(raster)) < spec.sampling_prob
    line_pixels = tuple(p for p, k in zip(raster, keep) if k)

    noise_mask = rng_noise.random((h, w)) < spec.noise_prob
    rx = np.fromiter((p[0] for p in raster), dtype=np.int64, count=len(raster))
    ry = np.fromiter((p[1] for p in raster), dtype=np.int64, count=len(raster))
    noise_mask[ry, rx] = False
    noise_rows, noise_cols = np.nonzero(noise_mask)
    noise_pixels = tuple((int(cx), int(cy)) for cy, cx in zip(noise_rows, noise_cols))

    image = np.zeros((h, w), dtype=np.uint8)
    if line_pixels:
        lx = np.array([p[0] for p in line_pixels])
        ly = np.array([p[1] for p in line_pixels])
        image[ly, lx] = FOREGROUND
    image[noise_rows, noise_cols] = FOREGROUND

    truth = GroundTruth(
        slope=slope,
        intercept=intercept,
        rho=rho,
        theta=theta,
        endpoints=((x0, y0), (x1, y1)),
        raster_length=len(raster),
        line_pixels=line_pixels,
        noise_pixels=noise_pixels,
        seed=spec.seed,
    )
    return image, truth


def write_ground_truth(path, truth: GroundTruth) -> None:
    """Write a ground-truth sidecar: commented line parameters, then one
    ``kind,x,y`` row per recorded pixel."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# slope={truth.slope!r} intercept={truth.intercept!r}\n")
        fh.write(f"# rho={truth.rho!r} theta={truth.theta!r}\n")
        (x0, y0), (x1, y1) = truth.endpoints
        fh.write(f"# endpoints={x0},{y0},{x1},{y1} raster_length={truth.raster_length}\n")
        fh.write(f"# seed={truth.seed}\n")
        writer = csv.writer(fh)
        writer.writerow(["kind", "x", "y"])
        for x, y in truth.line_pixels:
            writer.writerow(["line", x, y])
        for x, y in truth.noise_pixels:
            writer.writerow(["noise", x, y])


def read_ground_truth(path) -> GroundTruth:
    """Inverse of :func:`write_ground_truth`."""
    meta: dict[str, str] = {}
    line_pixels: list[tuple[int, int]] = []
    noise_pixels: list[tuple[int, int]] = []
    with open(path, newline="") as fh:
        header_seen = False
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].startswith("#"):
                # csv split the comment at embedded commas; put them back.
                text = ",".join(row).lstrip("#").strip()
                for token in text.split():
                    if "=" in token:
                        k, v = token.split("=", 1)
                        meta[k] = v
                continue
            if not header_seen:
                if row != ["kind", "x", "y"]:
                    raise InvalidInputError(f"unexpected sidecar header {row!r}")
                header_seen = True
                continue
            kind, x, y = row[0], int(row[1]), int(row[2])
            if kind == "line":
                line_pixels.append((x, y))
            elif kind == "noise":
                noise_pixels.append((x, y))
            else:
                raise InvalidInputError(f"unknown pixel kind {kind!r}")
    try:
        ex = [int(t) for t in meta["endpoints"].split(",")]
        return GroundTruth(
            slope=float(meta["slope"]),
            intercept=float(meta["intercept"]),
            rho=float(meta["rho"]),
            theta=float(meta["theta"]),
            endpoints=((ex[0], ex[1]), (ex[2], ex[3])),
            raster_length=int(meta["raster_length"]),
            line_pixels=tuple(line_pixels),
            noise_pixels=tuple(noise_pixels),
            seed=int(meta["seed"]),
        )
    except KeyError as exc:
        raise InvalidInputError(f"sidecar is missing field {exc}") from exc
