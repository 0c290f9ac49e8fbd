"""Line detection: coarse Hough peaks refined by least squares or LMS.

The pipeline extracts bright pixels, votes them into a (rho, theta) grid,
picks peak bins, and then re-estimates each peak's line from the points that
voted for it.  Refinement runs in a peak-dependent frame: lines closer to
vertical than horizontal are regressed as ``x = slope*y + intercept`` so the
residuals stay well conditioned (see :func:`lmsline.hough.needs_axis_swap`).

With coarse bins, a peak's support mixes the true line's pixels with noise
pixels that happen to share the bin; plain least squares is dragged by those
leverage points while the LMS refit ignores them, which is the robustness
the detector is after.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DegenerateInputError, InvalidInputError, LineEq, Point2
from .hough import (
    HoughParams,
    extract_points,
    find_peaks,
    hough_vote,
    line_to_polar,
    needs_axis_swap,
    polar_to_frame_fit,
    supporting_points,
)
from .solver import LmsFit, solve_lms

METHOD_SHT = "sht"
METHOD_OLS = "ols"
METHOD_LMS = "lms"
METHODS = (METHOD_SHT, METHOD_OLS, METHOD_LMS)

DEFAULT_THRESHOLD = 128
DEFAULT_MIN_VOTES = 2

LMS_SUPPORT_CAP = 256
"""Support subsample size for the LMS refit.

The exact solver is quadratic in its input, so supports larger than this are
thinned with an even deterministic stride before fitting; a few hundred
points already pin the slab well below pixel accuracy.
"""


@dataclass(frozen=True)
class LineDetection:
    """One detected line.

    ``slope``/``intercept`` parameterize the regression frame:
    ``y = slope*x + intercept`` normally, ``x = slope*y + intercept`` when
    ``axis_swapped``.  ``rho``/``theta`` (degrees) give the frame-free normal
    form.  ``support`` is the untouched voting support of the peak, and
    ``lms_value`` is the minimized median-type objective (LMS method only).
    """

    method: str
    rho: float
    theta: float
    slope: float
    intercept: float
    axis_swapped: bool
    support: tuple[Point2, ...]
    lms_value: float | None = None

    @property
    def image_slope(self) -> float:
        """Slope in image coordinates ``y(x)``; +-inf for a vertical line."""
        if not self.axis_swapped:
            return self.slope
        if self.slope == 0.0:
            return math.inf
        return 1.0 / self.slope

    @property
    def image_intercept(self) -> float:
        """Intercept in image coordinates; nan for a vertical line."""
        if not self.axis_swapped:
            return self.intercept
        if self.slope == 0.0:
            return math.nan
        return -self.intercept / self.slope


def _design(support, axis_swapped: bool) -> tuple[np.ndarray, np.ndarray]:
    pts = list(support)
    x = np.array([p.x for p in pts], dtype=float)
    y = np.array([p.y for p in pts], dtype=float)
    return (y, x) if axis_swapped else (x, y)


def refine_ols(support, axis_swapped: bool = False) -> LineEq:
    """Ordinary least-squares line through the support, in the given frame.

    Needs at least two points with two distinct regressor values.
    """
    t, z = _design(support, axis_swapped)
    if t.size < 2:
        raise DegenerateInputError(f"least squares needs at least 2 points, got {t.size}")
    if not (np.isfinite(t).all() and np.isfinite(z).all()):
        raise InvalidInputError("support coordinates must be finite")
    t_mean = t.mean()
    z_mean = z.mean()
    dt = t - t_mean
    denom = float(dt @ dt)
    if denom == 0.0:
        raise DegenerateInputError("support is constant along the regression axis")
    slope = float(dt @ (z - z_mean)) / denom
    return LineEq(slope=slope, intercept=float(z_mean - slope * t_mean))


def subsample_support(support, cap: int):
    """Deterministic even-stride thinning of the support to at most ``cap``.

    Keeps scan order, so line and noise pixels stay proportionally
    represented; identity when the support already fits.
    """
    pts = list(support)
    if cap < 3:
        raise InvalidInputError(f"support cap must be at least 3, got {cap}")
    m = len(pts)
    if m <= cap:
        return pts
    idx = (np.arange(cap, dtype=np.int64) * m) // cap
    return [pts[int(k)] for k in idx]


def refine_lms(
    support,
    q: int | None = None,
    axis_swapped: bool = False,
    *,
    backend: str = "seq",
    workers: int | None = None,
    support_cap: int | None = None,
) -> LmsFit:
    """Exact LMS line through the support, in the given frame.

    Delegates to :func:`lmsline.solver.solve_lms` on the frame's design
    points; ``q`` defaults to a strict majority of the (possibly thinned)
    support.  The support itself is never modified.
    """
    pts = list(support)
    if support_cap is not None:
        pts = subsample_support(pts, support_cap)
    t, z = _design(pts, axis_swapped)
    return solve_lms(np.column_stack([t, z]), q, backend=backend, workers=workers)


def detect_lines(
    image: np.ndarray,
    params: HoughParams,
    method: str = METHOD_LMS,
    max_peaks: int = 1,
    *,
    threshold: int = DEFAULT_THRESHOLD,
    min_votes: int = DEFAULT_MIN_VOTES,
    q: int | None = None,
    backend: str = "seq",
    workers: int | None = None,
    support_cap: int | None = LMS_SUPPORT_CAP,
) -> list[LineDetection]:
    """Detect up to ``max_peaks`` lines in a grayscale image.

    ``method`` picks the per-peak estimate: ``"sht"`` reports the raw bin
    center, ``"ols"`` least-squares-refits the peak support, ``"lms"``
    LMS-refits it.  Returns one detection per surviving peak, in peak order;
    an image with no qualifying peak yields an empty list.
    """
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}")
    points = extract_points(image, threshold=threshold)
    if not points:
        return []
    acc = hough_vote(points, params)
    peaks = find_peaks(acc, max_peaks, min_votes)
    out: list[LineDetection] = []
    for peak in peaks:
        support = supporting_points(points, peak, params)
        swapped = needs_axis_swap(peak.theta)
        lms_value: float | None = None
        if method == METHOD_SHT:
            rho, theta = peak.rho, peak.theta
            slope, intercept, swapped = polar_to_frame_fit(rho, theta)
        elif method == METHOD_OLS:
            fit = refine_ols(support, swapped)
            slope, intercept = fit.slope, fit.intercept
            rho, theta = line_to_polar(slope, intercept, swapped)
        else:
            fit = refine_lms(
                support, q, swapped, backend=backend, workers=workers, support_cap=support_cap
            )
            slope, intercept = fit.line.slope, fit.line.intercept
            lms_value = fit.lms_value
            rho, theta = line_to_polar(slope, intercept, swapped)
        out.append(
            LineDetection(
                method=method,
                rho=rho,
                theta=theta,
                slope=slope,
                intercept=intercept,
                axis_swapped=swapped,
                support=tuple(support),
                lms_value=lms_value,
            )
        )
    return out
