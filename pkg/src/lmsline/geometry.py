"""Primal/dual geometry for least-median-of-squares line fitting.

The point-line duality used throughout maps a data point ``(a, b)`` to the
dual line ``v = a*u - b`` and a non-vertical line ``y = a*x - b`` to the dual
point ``(a, b)``.  The map preserves incidence, reverses above/below order,
and turns the vertical width of a slab of lines into the length of a vertical
segment in the dual plane.  Those three facts are what let an exact
least-median solver run as a search over vertical segments ("bracelets")
anchored at dual-line crossings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

GEOM_EPS = 1e-9
"""Base tolerance for geometric classification (contacts, near-ties).

Applied as an absolute tolerance after scaling by the magnitude of the
values being compared, so it behaves like a relative tolerance for large
coordinates and an absolute one near zero.
"""


class InvalidInputError(ValueError):
    """A precondition on user input was violated (bad value, bad shape)."""


class DegenerateInputError(ValueError):
    """The input admits no meaningful answer (e.g. no non-vertical fit line)."""


@dataclass(frozen=True)
class Point2:
    """A point in the primal (data) plane."""

    x: float
    y: float


@dataclass(frozen=True)
class LineEq:
    """A non-vertical line ``y = slope * x + intercept``."""

    slope: float
    intercept: float

    def y_at(self, x: float) -> float:
        return self.slope * x + self.intercept

    def residual(self, p: Point2) -> float:
        """Signed vertical residual of ``p`` relative to this line."""
        return p.y - (self.slope * p.x + self.intercept)


@dataclass(frozen=True)
class DualLine:
    """Dual image ``v = a*u - b`` of the primal point ``(a, b)``.

    ``source_index`` records the position of the originating point in the
    input sequence; every tie-break downstream is phrased in terms of it.
    """

    a: float
    b: float
    source_index: int

    def value_at(self, u: float) -> float:
        return self.a * u - self.b


@dataclass(frozen=True)
class DualIntersection:
    """Crossing of two non-parallel dual lines, with ``i < j``."""

    u: float
    v: float
    i: int
    j: int


@dataclass(frozen=True)
class Bracelet:
    """A vertical segment at abscissa ``u`` spanning ``coverage`` cut values.

    ``[v_low, v_high]`` covers exactly ``coverage`` of the dual-line values at
    ``u`` (counting multiplicity), one of its endpoints sitting on the anchor
    intersection.  Back in the primal plane it is a slab of vertical height
    ``height`` containing ``coverage`` data points.
    """

    u: float
    v_low: float
    v_high: float
    anchor: DualIntersection
    coverage: int

    @property
    def height(self) -> float:
        return self.v_high - self.v_low


def as_xy_arrays(points: Iterable[Point2] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coerce a point collection into float64 ``(x, y)`` arrays.

    Accepts a sequence of :class:`Point2` (or ``(x, y)`` pairs) or an
    ``(n, 2)`` array.  Raises :class:`InvalidInputError` on an empty set or
    any non-finite coordinate.
    """
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidInputError(f"expected an (n, 2) array, got shape {arr.shape}")
        x = np.ascontiguousarray(arr[:, 0])
        y = np.ascontiguousarray(arr[:, 1])
    else:
        pts = list(points)
        if pts and isinstance(pts[0], Point2):
            x = np.array([p.x for p in pts], dtype=float)
            y = np.array([p.y for p in pts], dtype=float)
        else:
            arr = np.asarray(pts, dtype=float)
            if arr.size == 0:
                x = np.empty(0)
                y = np.empty(0)
            elif arr.ndim != 2 or arr.shape[1] != 2:
                raise InvalidInputError("points must be (x, y) pairs")
            else:
                x, y = arr[:, 0].copy(), arr[:, 1].copy()
    if x.size == 0:
        raise InvalidInputError("point set must be nonempty")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise InvalidInputError("point coordinates must be finite")
    return x, y


def dualize(points: Iterable[Point2] | np.ndarray) -> list[DualLine]:
    """Map points ``(a, b)`` to dual lines ``v = a*u - b``, keeping input order."""
    x, y = as_xy_arrays(points)
    return [DualLine(a=float(xi), b=float(yi), source_index=k) for k, (xi, yi) in enumerate(zip(x, y))]


def pair_intersection(l1: DualLine, l2: DualLine) -> DualIntersection | None:
    """Intersection of two dual lines, or ``None`` when their slopes match.

    Lines with equal ``a`` (parallel duals, i.e. duplicate x-coordinates in
    the primal) yield no crossing.  The returned indices satisfy ``i < j``
    regardless of argument order.
    """
    if l1.source_index == l2.source_index:
        raise InvalidInputError("pair_intersection needs two distinct lines")
    if l1.a == l2.a:
        return None
    lo, hi = (l1, l2) if l1.source_index < l2.source_index else (l2, l1)
    u = (lo.b - hi.b) / (lo.a - hi.a)
    v = lo.a * u - lo.b
    return DualIntersection(u=u, v=v, i=lo.source_index, j=hi.source_index)


def vertical_cut(lines: Sequence[DualLine], u: float) -> list[tuple[float, int]]:
    """Values of all dual lines at abscissa ``u``, sorted ascending.

    Ties are ordered by ``source_index`` so the cut is a total order and the
    result is reproducible for concurrent lines.
    """
    if not lines:
        raise InvalidInputError("cut needs at least one line")
    if not math.isfinite(u):
        raise InvalidInputError("cut abscissa must be finite")
    a = np.array([ln.a for ln in lines])
    b = np.array([ln.b for ln in lines])
    idx = np.array([ln.source_index for ln in lines])
    vals = a * u - b
    order = np.lexsort((idx, vals))
    return [(float(vals[k]), int(idx[k])) for k in order]


def bracelet_at(ip: DualIntersection, lines: Sequence[DualLine], q: int) -> Bracelet | None:
    """Shortest vertical segment at ``ip.u`` that covers ``q`` cut values and
    has one endpoint at ``ip.v``.

    The two anchor lines are treated as sitting exactly at ``ip.v`` (their
    recomputed values are snapped there), so the cut contains at least two
    copies of the anchor value.  Let ``k_lo`` and ``k_hi`` be the first and
    last rank of ``ip.v`` in the sorted cut.  The downward window spans from
    the ``(k_hi - q + 1)``-th value up to ``ip.v``; the upward window spans
    from ``ip.v`` to the ``(k_lo + q - 1)``-th value.  Whichever exists and is
    shorter wins; an exact tie goes to the upward window.  Returns ``None``
    when ``q`` exceeds the number of lines (no window fits).
    """
    if q < 2:
        raise InvalidInputError(f"coverage must be at least 2, got {q}")
    n = len(lines)
    if q > n:
        return None
    a = np.array([ln.a for ln in lines])
    b = np.array([ln.b for ln in lines])
    idx = np.array([ln.source_index for ln in lines])
    vals = a * ip.u - b
    vals[(idx == ip.i) | (idx == ip.j)] = ip.v
    k_lo = int(np.count_nonzero(vals < ip.v))
    k_hi = int(np.count_nonzero(vals <= ip.v)) - 1
    vs = np.sort(vals)
    down = k_hi - (q - 1)
    up = k_lo + (q - 1)
    h_down = ip.v - vs[down] if down >= 0 else math.inf
    h_up = vs[up] - ip.v if up <= n - 1 else math.inf
    if math.isinf(h_down) and math.isinf(h_up):
        return None
    if h_up <= h_down:
        v_low, v_high = ip.v, float(vs[up])
    else:
        v_low, v_high = float(vs[down]), ip.v
    return Bracelet(u=ip.u, v_low=v_low, v_high=v_high, anchor=ip, coverage=q)


def median_sq_residual(points: Iterable[Point2] | np.ndarray, line: LineEq, q: int) -> float:
    """The ``q``-th smallest squared vertical residual of ``points`` to ``line``."""
    x, y = as_xy_arrays(points)
    n = x.size
    if not 1 <= q <= n:
        raise InvalidInputError(f"rank q must satisfy 1 <= q <= {n}, got {q}")
    r = y - (line.slope * x + line.intercept)
    sq = r * r
    return float(np.partition(sq, q - 1)[q - 1])
