"""Polar Hough transform: voting, peak extraction, and per-peak support.

A feature point ``(x, y)`` votes once per angle bin; with ``theta`` taken at
the bin center, the distance ``rho = x*cos(theta) + y*sin(theta)`` selects
the distance bin.  ``theta`` covers ``[0, 180)`` degrees and ``rho`` covers
``[-rho_max, rho_max]``, so every line through the image is representable
exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import InvalidInputError, Point2


@dataclass(frozen=True)
class HoughParams:
    """Accumulator geometry: bin widths and the distance range.

    ``delta_theta`` is in degrees; ``rho_max`` should be at least the image
    diagonal so no vote falls outside the grid.
    """

    delta_rho: float
    delta_theta: float
    rho_max: float

    def __post_init__(self) -> None:
        if not (self.delta_rho > 0 and self.delta_theta > 0 and self.rho_max > 0):
            raise InvalidInputError("Hough bin widths and rho range must be positive")
        if self.delta_theta > 180:
            raise InvalidInputError("delta_theta cannot exceed 180 degrees")

    @classmethod
    def for_image(cls, width: int, height: int, delta_rho: float, delta_theta: float) -> "HoughParams":
        return cls(delta_rho=delta_rho, delta_theta=delta_theta, rho_max=math.hypot(width, height))

    @property
    def n_theta(self) -> int:
        return math.ceil(180.0 / self.delta_theta)

    @property
    def n_rho(self) -> int:
        return math.ceil(2.0 * self.rho_max / self.delta_rho)

    def theta_center(self, t: int) -> float:
        """Center angle of bin ``t``, degrees."""
        return (t + 0.5) * self.delta_theta

    def rho_center(self, r: int) -> float:
        return -self.rho_max + (r + 0.5) * self.delta_rho

    def theta_centers(self) -> np.ndarray:
        return (np.arange(self.n_theta) + 0.5) * self.delta_theta

    def rho_bin(self, rho: np.ndarray | float) -> np.ndarray:
        """Distance-bin index of ``rho``, clipped to the grid."""
        r = np.floor((np.asarray(rho, dtype=float) + self.rho_max) / self.delta_rho).astype(np.int64)
        return np.clip(r, 0, self.n_rho - 1)

    def theta_bin(self, theta_deg: float) -> int:
        t = int(math.floor(theta_deg / self.delta_theta))
        return min(max(t, 0), self.n_theta - 1)


@dataclass(frozen=True)
class HoughAccumulator:
    """Vote grid of shape ``(n_rho, n_theta)`` plus the params that shaped it."""

    bins: np.ndarray
    params: HoughParams

    @property
    def total_votes(self) -> int:
        return int(self.bins.sum())


@dataclass(frozen=True)
class Peak:
    """A local maximum of the accumulator, with its bin-center coordinates."""

    rho_bin: int
    theta_bin: int
    votes: int
    rho: float
    theta: float


def extract_points(image: np.ndarray, threshold: int = 128) -> list[Point2]:
    """Feature points of a grayscale image: pixels with intensity >= threshold.

    Points are reported as ``(x, y) = (column, row)`` in row-major scan
    order, which fixes the input order every later tie-break refers to.
    """
    img = np.asarray(image)
    if img.ndim != 2:
        raise InvalidInputError(f"expected a 2-D grayscale image, got shape {img.shape}")
    rows, cols = np.nonzero(img >= threshold)
    return [Point2(float(c), float(r)) for r, c in zip(rows, cols)]


def _point_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([p.x for p in points], dtype=float)
    y = np.array([p.y for p in points], dtype=float)
    return x, y


def hough_vote(points, params: HoughParams) -> HoughAccumulator:
    """Accumulate one vote per (point, angle bin).

    Votes are scattered with an integer bincount, so the result is exactly
    reproducible; the grid total is always ``len(points) * n_theta``.
    """
    n_rho, n_theta = params.n_rho, params.n_theta
    bins = np.zeros((n_rho, n_theta), dtype=np.int64)
    pts = list(points)
    if not pts:
        return HoughAccumulator(bins=bins, params=params)
    x, y = _point_arrays(pts)
    theta = np.radians(params.theta_centers())
    rho = x[:, None] * np.cos(theta)[None, :] + y[:, None] * np.sin(theta)[None, :]
    r_bins = params.rho_bin(rho)
    t_bins = np.broadcast_to(np.arange(n_theta, dtype=np.int64), r_bins.shape)
    flat = np.bincount((r_bins * n_theta + t_bins).ravel(), minlength=n_rho * n_theta)
    return HoughAccumulator(bins=flat.reshape(n_rho, n_theta), params=params)


def find_peaks(acc: HoughAccumulator, max_peaks: int, min_votes: int = 1) -> list[Peak]:
    """Local maxima of the vote grid, strongest first.

    A bin qualifies when its count is >= each of its 8 neighbors (missing
    neighbors ignored) and >= ``min_votes``; plateau bins all qualify.
    Candidates are ordered by descending votes, then ascending
    ``(rho_bin, theta_bin)``, and the first ``max_peaks`` are returned.
    """
    if max_peaks < 1:
        raise InvalidInputError(f"max_peaks must be positive, got {max_peaks}")
    if min_votes < 1:
        raise InvalidInputError(f"min_votes must be positive, got {min_votes}")
    grid = acc.bins
    n_rho, n_theta = grid.shape
    padded = np.full((n_rho + 2, n_theta + 2), -1, dtype=grid.dtype)
    padded[1:-1, 1:-1] = grid
    ok = grid >= min_votes
    for dr in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if dr == 0 and dt == 0:
                continue
            ok &= grid >= padded[1 + dr : 1 + dr + n_rho, 1 + dt : 1 + dt + n_theta]
    rs, ts = np.nonzero(ok)
    if rs.size == 0:
        return []
    votes = grid[rs, ts]
    order = np.lexsort((ts, rs, -votes))[:max_peaks]
    return [
        Peak(
            rho_bin=int(rs[k]),
            theta_bin=int(ts[k]),
            votes=int(votes[k]),
            rho=acc.params.rho_center(int(rs[k])),
            theta=acc.params.theta_center(int(ts[k])),
        )
        for k in order
    ]


def supporting_points(points, peak: Peak, params: HoughParams) -> list[Point2]:
    """The subset of ``points`` whose vote landed in the peak's bin.

    Recomputes the vote arithmetic for the peak's angle bin, so membership
    agrees exactly with :func:`hough_vote`; input order is preserved.
    """
    pts = list(points)
    if not pts:
        return []
    x, y = _point_arrays(pts)
    theta = math.radians(params.theta_center(peak.theta_bin))
    rho = x * math.cos(theta) + y * math.sin(theta)
    mask = params.rho_bin(rho) == peak.rho_bin
    return [p for p, m in zip(pts, mask) if m]


def line_to_polar(slope: float, intercept: float, axis_swapped: bool = False) -> tuple[float, float]:
    """Normal form ``(rho, theta_deg)`` of a fitted line, theta in ``[0, 180)``.

    ``axis_swapped=False`` reads the fit as ``y = slope*x + intercept``;
    ``True`` reads it as ``x = slope*y + intercept`` (the frame used for
    near-vertical lines, which covers ``slope = 0`` i.e. ``x = c``).
    """
    if axis_swapped:
        t = math.atan2(-slope, 1.0)
        rho = intercept * math.cos(t)
        if t < 0.0:
            t += math.pi
            rho = -rho
    else:
        t = math.atan2(1.0, -slope)
        rho = intercept * math.sin(t)
    return rho, math.degrees(t)


def polar_to_frame_fit(rho: float, theta_deg: float) -> tuple[float, float, bool]:
    """Slope/intercept of the line ``x cos(t) + y sin(t) = rho`` in the frame
    the axis-swap rule picks for that angle.

    Returns ``(slope, intercept, axis_swapped)``: the ``y = slope*x + c``
    frame when the line is closer to horizontal, the ``x = slope*y + c``
    frame when it is closer to vertical.  Both denominators stay >= cos(45deg),
    so the conversion is numerically safe on either branch.
    """
    swapped = needs_axis_swap(theta_deg)
    t = math.radians(theta_deg)
    if swapped:
        return -math.tan(t), rho / math.cos(t), True
    return -math.cos(t) / math.sin(t), rho / math.sin(t), False


def needs_axis_swap(theta_deg: float) -> bool:
    """True when a line at this normal angle is nearer vertical than
    horizontal, i.e. ``min(theta, 180 - theta) < 45`` degrees."""
    return min(theta_deg, 180.0 - theta_deg) < 45.0
