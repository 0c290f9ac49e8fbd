"""Tests for the primal/dual geometry layer.

The three structural properties of the dual map (incidence preservation,
above/below order reversal, strip enclosure) get randomized checks here;
the acceptance suite reruns them at full trial counts.
"""

import math

import numpy as np
import pytest

from lmsline import (
    InvalidInputError,
    LineEq,
    Point2,
    bracelet_at,
    dualize,
    median_sq_residual,
    pair_intersection,
    vertical_cut,
)

SQUARE = [Point2(0, 0), Point2(1, 0), Point2(0, 1), Point2(1, 1)]


def test_dualize_maps_point_to_line_values():
    (d,) = dualize([Point2(2.0, 3.0)])
    assert (d.a, d.b, d.source_index) == (2.0, 3.0, 0)
    assert d.value_at(0.0) == -3.0
    assert d.value_at(1.0) == -1.0
    assert d.value_at(2.0) == 1.0


def test_dualize_origin_gives_zero_line():
    (d,) = dualize([Point2(0.0, 0.0)])
    for u in (-5.0, 0.0, 3.25):
        assert d.value_at(u) == 0.0


def test_dualize_keeps_input_order():
    pts = [Point2(3, 1), Point2(-2, 0), Point2(3, 1)]
    lines = dualize(pts)
    assert [ln.source_index for ln in lines] == [0, 1, 2]
    assert [(ln.a, ln.b) for ln in lines] == [(3, 1), (-2, 0), (3, 1)]


def test_dualize_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        dualize([])
    with pytest.raises(InvalidInputError):
        dualize([Point2(math.nan, 0.0)])
    with pytest.raises(InvalidInputError):
        dualize(np.array([[1.0, 2.0, 3.0]]))


def test_pair_intersection_simple():
    la, lb = dualize([Point2(0, 0), Point2(1, 1)])
    ip = pair_intersection(la, lb)
    assert (ip.u, ip.v, ip.i, ip.j) == (1.0, 0.0, 0, 1)


def test_pair_intersection_frozen_example():
    # duals of (0,1) and (4,3): u = (1-3)/(0-4) = 0.5, v = 0*0.5 - 1 = -1
    la, lb = dualize([Point2(0, 1), Point2(4, 3)])
    ip = pair_intersection(la, lb)
    assert (ip.u, ip.v) == (0.5, -1.0)


def test_pair_intersection_is_order_insensitive():
    la, lb = dualize([Point2(2, 5), Point2(-1, 4)])
    fwd = pair_intersection(la, lb)
    rev = pair_intersection(lb, la)
    assert fwd == rev
    assert fwd.i < fwd.j


def test_pair_intersection_parallel_and_duplicate():
    la, lb = dualize([Point2(2, 0), Point2(2, 5)])
    assert pair_intersection(la, lb) is None
    lc, ld = dualize([Point2(1, 1), Point2(1, 1)])
    assert pair_intersection(lc, ld) is None
    with pytest.raises(InvalidInputError):
        pair_intersection(la, la)


def test_vertical_cut_square_example():
    cut = vertical_cut(dualize(SQUARE), 0.0)
    assert cut == [(-1.0, 2), (-1.0, 3), (0.0, 0), (0.0, 1)]


def test_vertical_cut_collinear_trio():
    lines = dualize([Point2(1, 2), Point2(3, 4), Point2(5, 6)])
    cut = vertical_cut(lines, 1.0)
    assert cut == [(-1.0, 0), (-1.0, 1), (-1.0, 2)]


def test_vertical_cut_sorted_with_index_ties():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(2, 30))
        pts = rng.normal(0, 5, (n, 2))
        if rng.random() < 0.5:
            pts[1] = pts[0]  # engineered duplicate -> tied values at any u
        u = float(rng.normal(0, 2))
        cut = vertical_cut(dualize(pts), u)
        vals = [v for v, _ in cut]
        assert vals == sorted(vals)
        assert sorted(i for _, i in cut) == list(range(n))
        for (v1, i1), (v2, i2) in zip(cut, cut[1:]):
            if v1 == v2:
                assert i1 < i2


def test_vertical_cut_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        vertical_cut([], 0.0)
    with pytest.raises(InvalidInputError):
        vertical_cut(dualize(SQUARE), math.inf)


def test_bracelet_square_example():
    lines = dualize(SQUARE)
    ip = pair_intersection(lines[0], lines[1])
    assert ip.v == 0.0
    br = bracelet_at(ip, lines, 3)
    # upward window out of range; downward covers {-1, 0, 0}
    assert (br.v_low, br.v_high) == (-1.0, 0.0)
    assert br.height == 1.0
    assert br.coverage == 3
    assert br.anchor == ip
    assert ip.v in (br.v_low, br.v_high)


def test_bracelet_collinear_trio_has_zero_height():
    lines = dualize([Point2(1, 2), Point2(3, 4), Point2(5, 6)])
    for a in range(3):
        for b in range(a + 1, 3):
            ip = pair_intersection(lines[a], lines[b])
            br = bracelet_at(ip, lines, 3)
            assert br.height == 0.0


def test_bracelet_coverage_validation():
    lines = dualize(SQUARE)
    ip = pair_intersection(lines[0], lines[1])
    assert bracelet_at(ip, lines, 5) is None
    with pytest.raises(InvalidInputError):
        bracelet_at(ip, lines, 1)


def test_bracelet_counts_covered_values():
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(4, 16))
        pts = rng.normal(0, 3, (n, 2))
        lines = dualize(pts)
        ip = None
        for a in range(n):
            for b in range(a + 1, n):
                ip = pair_intersection(lines[a], lines[b])
                if ip is not None:
                    break
            if ip is not None:
                break
        q = int(rng.integers(2, n + 1))
        br = bracelet_at(ip, lines, q)
        if br is None:
            continue
        vals = np.array([ln.value_at(ip.u) for ln in lines])
        vals[[ip.i, ip.j]] = ip.v
        covered = np.count_nonzero((vals >= br.v_low) & (vals <= br.v_high))
        assert covered >= q


def test_median_sq_residual_examples():
    line = LineEq(2.0, 1.0)
    pts = [Point2(0, 1), Point2(1, 3), Point2(2, 5)]
    for q in (1, 2, 3):
        assert median_sq_residual(pts, line, q) == 0.0
    pair = [Point2(0, 0), Point2(0, 2)]
    flat = LineEq(0.0, 0.0)
    assert median_sq_residual(pair, flat, 1) == 0.0
    assert median_sq_residual(pair, flat, 2) == 4.0


def test_median_sq_residual_matches_sorted_rank():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 20))
        pts = rng.normal(0, 4, (n, 2))
        line = LineEq(float(rng.normal()), float(rng.normal()))
        sq = sorted((p[1] - (line.slope * p[0] + line.intercept)) ** 2 for p in pts)
        q = int(rng.integers(1, n + 1))
        assert median_sq_residual(pts, line, q) == pytest.approx(sq[q - 1], rel=1e-12)


def test_median_sq_residual_rank_validation():
    pts = [Point2(0, 0), Point2(1, 1)]
    with pytest.raises(InvalidInputError):
        median_sq_residual(pts, LineEq(0, 0), 0)
    with pytest.raises(InvalidInputError):
        median_sq_residual(pts, LineEq(0, 0), 3)


# --- structural properties of the dual map ---


def test_duality_preserves_incidence():
    """If p lies on y = m*x + c, the dual line of p passes through the
    line's dual point (m, -c)."""
    rng = np.random.default_rng(101)
    for _ in range(200):
        m, c = rng.normal(0, 3, 2)
        px = rng.normal(0, 10)
        p = Point2(float(px), float(m * px + c))
        (d,) = dualize([p])
        assert d.value_at(m) == pytest.approx(-c, rel=1e-9, abs=1e-9)


def test_duality_reverses_above_below():
    rng = np.random.default_rng(102)
    for _ in range(200):
        m, c = rng.normal(0, 2, 2)
        p = Point2(float(rng.normal(0, 5)), float(rng.normal(0, 5)))
        margin = p.y - (m * p.x + c)
        if abs(margin) < 1e-6:
            continue
        (d,) = dualize([p])
        # p above the line <=> the line's dual point is above p's dual line
        assert (margin > 0) == (-c > d.value_at(m))


def test_duality_intersection_maps_to_joining_line():
    rng = np.random.default_rng(103)
    for _ in range(200):
        pts = rng.normal(0, 5, (2, 2))
        if pts[0, 0] == pts[1, 0]:
            continue
        la, lb = dualize(pts)
        ip = pair_intersection(la, lb)
        # (ip.u, ip.v) is the dual point of the primal line joining the two
        # points: y = u*x - v
        for px, py in pts:
            assert py == pytest.approx(ip.u * px - ip.v, rel=1e-9, abs=1e-9)


def test_duality_strip_enclosure():
    """p lies in the slab between y = m*x + c1 and y = m*x + c2 exactly when
    p's dual line value at m lies in [-c2, -c1]."""
    rng = np.random.default_rng(104)
    checked = 0
    for _ in range(300):
        m = float(rng.normal(0, 2))
        c1, c2 = sorted(rng.normal(0, 5, 2))
        p = Point2(float(rng.normal(0, 5)), float(rng.normal(0, 5)))
        r = p.y - m * p.x
        if min(abs(r - c1), abs(r - c2)) < 1e-9:
            continue
        inside_primal = c1 <= r <= c2
        (d,) = dualize([p])
        inside_dual = -c2 <= d.value_at(m) <= -c1
        assert inside_primal == inside_dual
        checked += 1
    assert checked > 250
