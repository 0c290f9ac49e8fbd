"""Exact least-median-of-squares (LMS) line estimation.

Given points ``(x_k, y_k)`` and a coverage rank ``q`` (default
``n // 2 + 1``), the LMS line minimizes the ``q``-th smallest squared
vertical residual.  Geometrically that line bisects the minimum-height slab
containing at least ``q`` points, so its objective value equals
``(slab_height / 2) ** 2`` and the fit tolerates up to ``n - q`` arbitrarily
bad points.

Two independent implementations are provided:

* :func:`solve_lms` - the production path.  It works in the dual plane,
  where the optimal slab appears as the shortest vertical ``q``-window whose
  endpoint lies on a crossing of two dual lines (an equioscillation
  argument: the optimal slab has three point contacts, two on one boundary).
  Enumerating all crossings is therefore exhaustive and exact.
* :func:`oracle_lms` - a primal brute-force check.  For every point pair it
  sweeps all contiguous ``q``-windows over the sorted intercepts at that
  pair's slope.  Same minimum by construction, reached with no shared search
  code.

Both resolve ties identically: smaller slab height first, then smaller
anchor pair ``(i, j)`` in lexicographic order, and within one abscissa the
upward window wins over an equally tall downward one (the upward window
starts at the same sorted rank the intercept sweep reaches first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .geometry import (
    GEOM_EPS,
    DegenerateInputError,
    InvalidInputError,
    LineEq,
    Point2,
    as_xy_arrays,
)


@dataclass(frozen=True)
class LmsFit:
    """Result of an exact LMS fit.

    ``lms_value`` is the minimized q-th smallest squared residual;
    ``slab_height`` the vertical extent of the optimal slab
    (``lms_value == (slab_height / 2) ** 2``); ``contact_indices`` the input
    positions of points lying on the slab boundary, at least three of them.
    """

    line: LineEq
    lms_value: float
    slab_height: float
    coverage: int
    contact_indices: tuple[int, ...]


def default_coverage(n: int) -> int:
    """The standard LMS rank: ``n // 2 + 1``, a strict majority."""
    return n // 2 + 1


def _validated(points, q: int | None) -> tuple[np.ndarray, np.ndarray, int]:
    x, y = as_xy_arrays(points)
    n = x.size
    if n < 3:
        raise DegenerateInputError(f"LMS needs at least 3 points, got {n}")
    if np.unique(x).size < 2:
        raise DegenerateInputError(
            "all points share one x-coordinate; no non-vertical line fits"
        )
    if q is None:
        q = default_coverage(n)
    if not 2 <= q <= n:
        raise InvalidInputError(f"coverage must satisfy 2 <= q <= {n}, got {q}")
    return x, y, q


def solve_lms(
    points,
    q: int | None = None,
    *,
    backend: str = "seq",
    workers: int | None = None,
    materialize: bool = False,
) -> LmsFit:
    """Exact LMS line fit.

    Parameters
    ----------
    points : sequence of Point2 or (n, 2) array
        Input data; at least 3 points with at least 2 distinct x-coordinates.
    q : int, optional
        Coverage rank in ``[2, n]``; defaults to ``n // 2 + 1``.
    backend : {"seq", "par"}
        Execution backend for the pair search.
    workers : int, optional
        Worker count for the parallel backend (``LMSLINE_WORKERS`` and the
        CPU count are the fallbacks, in that order).
    materialize : bool
        Store all intersections up front instead of streaming them in
        chunks.  Same result, quadratic memory; kept for benchmarking.

    Raises
    ------
    DegenerateInputError
        Fewer than 3 points, or all x equal (only vertical fits exist).
    InvalidInputError
        Non-finite input, bad ``q``, unknown backend, bad worker count.
    """
    x, y, q = _validated(points, q)
    engine = _backend.get_backend(backend, workers)
    rec = engine.minimum_bracelet(x, y, q, materialize=materialize)
    if rec is None:
        # Unreachable for validated input: some pair has distinct x, and any
        # vertical cut admits at least one q-window once q <= n.
        raise DegenerateInputError("no candidate slab found")
    slope = rec.u
    intercept = -(rec.v_low + rec.v_high) * 0.5
    half = (rec.v_high - rec.v_low) * 0.5
    # Contact set: dual lines meeting a window endpoint, with the anchor pair
    # snapped to the anchor ordinate exactly as during the search.
    vals = x * rec.u - y
    vals[[rec.i, rec.j]] = x[rec.i] * rec.u - y[rec.i]
    scale = max(1.0, float(np.max(np.abs(vals))))
    tol = GEOM_EPS * scale
    on_low = np.abs(vals - rec.v_low) <= tol
    on_high = np.abs(vals - rec.v_high) <= tol
    contacts = tuple(int(k) for k in np.flatnonzero(on_low | on_high))
    return LmsFit(
        line=LineEq(slope=slope, intercept=intercept),
        lms_value=half * half,
        slab_height=rec.v_high - rec.v_low,
        coverage=q,
        contact_indices=contacts,
    )


def oracle_lms(points, q: int | None = None) -> LmsFit:
    """Brute-force LMS reference, independent of the dual-plane search.

    For each pair ``i < j`` with distinct x, take the slope
    ``s = (y_j - y_i) / (x_j - x_i)``, compute every point's intercept at
    that slope, sort the intercepts, and scan all contiguous ``q``-windows
    for the narrowest (first window on ties).  The global best over pairs is
    kept under the same ``(height, i, j)`` key the solver uses; the fit line
    passes through the midpoint of the winning window.

    Quadratic memory per pair row and no shared code with
    :func:`solve_lms`'s search; intended for verification at small ``n``.
    """
    x, y, q = _validated(points, q)
    n = x.size
    best_key: tuple[float, int, int] | None = None
    best: tuple[float, float, float] | None = None  # slope, c_low, c_high
    for i in range(n - 1):
        j = np.arange(i + 1, n)
        dx = x[j] - x[i]
        valid = dx != 0.0
        if not valid.any():
            continue
        j = j[valid]
        s = (y[j] - y[i]) / (x[j] - x[i])
        c = y[None, :] - s[:, None] * x[None, :]
        c.sort(axis=1)
        spans = c[:, q - 1 :] - c[:, : n - q + 1]
        w = np.argmin(spans, axis=1)  # first minimal window in sweep order
        rows = np.arange(j.size)
        row_spans = spans[rows, w]
        r = int(np.argmin(row_spans))  # smallest j on ties (j ascending)
        key = (float(row_spans[r]), i, int(j[r]))
        if best_key is None or key < best_key:
            best_key = key
            lo = int(w[r])
            best = (float(s[r]), float(c[r, lo]), float(c[r, lo + q - 1]))
    if best is None:
        raise DegenerateInputError("no candidate slope found")
    slope, c_low, c_high = best
    intercept = (c_low + c_high) * 0.5
    half = (c_high - c_low) * 0.5
    line = LineEq(slope=slope, intercept=intercept)
    c_all = y - slope * x
    scale = max(1.0, float(np.max(np.abs(c_all))))
    tol = GEOM_EPS * scale
    on_edge = (np.abs(c_all - c_low) <= tol) | (np.abs(c_all - c_high) <= tol)
    return LmsFit(
        line=line,
        lms_value=half * half,
        slab_height=c_high - c_low,
        coverage=q,
        contact_indices=tuple(int(k) for k in np.flatnonzero(on_edge)),
    )
