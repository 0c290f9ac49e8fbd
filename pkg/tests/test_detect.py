"""Tests for peak refinement and the detection pipeline."""

import math

import numpy as np
import pytest

from lmsline import (
    DegenerateInputError,
    HoughParams,
    InvalidInputError,
    LineDetection,
    Point2,
    SyntheticSpec,
    detect_lines,
    gen_synthetic,
    line_to_polar,
    needs_axis_swap,
    polar_to_frame_fit,
    refine_lms,
    refine_ols,
    subsample_support,
)
from lmsline.detect import LMS_SUPPORT_CAP


# ---------------------------------------------------------------- refine_ols

def test_ols_exact_line():
    fit = refine_ols([Point2(0, 1), Point2(1, 3), Point2(2, 5)])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)


def test_ols_square_balances():
    sq = [Point2(0, 0), Point2(0, 1), Point2(1, 0), Point2(1, 1)]
    fit = refine_ols(sq)
    assert fit.slope == pytest.approx(0.0)
    assert fit.intercept == pytest.approx(0.5)


def test_ols_matches_normal_equations():
    rng = np.random.default_rng(21)
    x = rng.uniform(-5, 20, 40)
    y = 1.7 * x - 3.0 + rng.normal(0, 0.6, 40)
    fit = refine_ols([Point2(float(a), float(b)) for a, b in zip(x, y)])
    design = np.column_stack([x, np.ones_like(x)])
    expect = np.linalg.solve(design.T @ design, design.T @ y)
    assert fit.slope == pytest.approx(expect[0], rel=1e-12)
    assert fit.intercept == pytest.approx(expect[1], rel=1e-12)


def test_ols_axis_swapped_regresses_x_on_y():
    pts = [Point2(2 * k + 1.0, float(k)) for k in range(6)]  # x = 2y + 1
    fit = refine_ols(pts, axis_swapped=True)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)


def test_ols_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        refine_ols([Point2(0, 0)])
    with pytest.raises(DegenerateInputError):
        refine_ols([Point2(3, 0), Point2(3, 5), Point2(3, 9)])
    # Constant y is fine unswapped, degenerate when y becomes the regressor.
    flat = [Point2(float(k), 2.0) for k in range(4)]
    assert refine_ols(flat).slope == pytest.approx(0.0)
    with pytest.raises(DegenerateInputError):
        refine_ols(flat, axis_swapped=True)


# ---------------------------------------------------------------- refine_lms

def test_lms_ignores_minority_outliers():
    support = [Point2(float(k), 3.0 * k + 2.0) for k in range(5)]
    support += [Point2(float(k) + 0.5, 500.0 + 40.0 * k) for k in range(4)]
    fit = refine_lms(support, q=5)
    assert fit.line.slope == pytest.approx(3.0)
    assert fit.line.intercept == pytest.approx(2.0)
    assert fit.lms_value == 0.0


def test_lms_axis_swapped_fits_in_rotated_frame():
    pts = [Point2(0.5 * k - 2.0, float(k)) for k in range(9)]  # x = y/2 - 2
    fit = refine_lms(pts, axis_swapped=True)
    assert fit.line.slope == pytest.approx(0.5)
    assert fit.line.intercept == pytest.approx(-2.0)


def test_refiners_leave_support_untouched():
    support = [Point2(float(k), 1.0 * k) for k in range(8)]
    before = list(support)
    refine_ols(support)
    refine_lms(support)
    assert support == before


def test_refine_lms_honors_support_cap():
    rng = np.random.default_rng(3)
    pts = [Point2(float(k), 2.0 * k + float(rng.normal(0, 0.01)))
           for k in range(50)]
    capped = refine_lms(pts, support_cap=8)
    direct = refine_lms(subsample_support(pts, 8))
    assert capped.line == direct.line
    assert capped.lms_value == direct.lms_value


# ---------------------------------------------------------- subsample_support

def test_subsample_identity_when_small():
    pts = [Point2(float(k), 0.0) for k in range(5)]
    assert subsample_support(pts, 5) is not pts  # fresh list
    assert subsample_support(pts, 5) == pts
    assert subsample_support(pts, 9) == pts


def test_subsample_even_stride():
    pts = [Point2(float(k), 0.0) for k in range(10)]
    picked = subsample_support(pts, 4)
    assert [p.x for p in picked] == [0.0, 2.0, 5.0, 7.0]


def test_subsample_validates_cap():
    pts = [Point2(float(k), 0.0) for k in range(10)]
    with pytest.raises(InvalidInputError):
        subsample_support(pts, 2)


# ----------------------------------------------------------- polar conversion

def test_line_to_polar_known_angles():
    rho, theta = line_to_polar(0.0, 200.0)
    assert theta == pytest.approx(90.0)
    assert rho == pytest.approx(200.0)
    rho, theta = line_to_polar(-1.0, 10.0)  # y = -x + 10
    assert theta == pytest.approx(45.0)
    assert rho == pytest.approx(10.0 * math.sin(math.radians(45.0)))


def test_line_to_polar_axis_swapped_vertical():
    # x = 5 in the swapped frame: slope 0, intercept 5.
    rho, theta = line_to_polar(0.0, 5.0, axis_swapped=True)
    assert theta == pytest.approx(0.0)
    assert rho == pytest.approx(5.0)


def test_polar_round_trip_through_frame_fit():
    rng = np.random.default_rng(17)
    for _ in range(200):
        theta = float(rng.uniform(0.0, 180.0))
        rho = float(rng.uniform(-300.0, 300.0))
        slope, intercept, swapped = polar_to_frame_fit(rho, theta)
        assert swapped == needs_axis_swap(theta)
        rho2, theta2 = line_to_polar(slope, intercept, axis_swapped=swapped)
        assert theta2 == pytest.approx(theta, abs=1e-9)
        assert rho2 == pytest.approx(rho, abs=1e-9)


def test_needs_axis_swap_boundaries():
    assert needs_axis_swap(0.0)
    assert needs_axis_swap(10.0)
    assert needs_axis_swap(44.999)
    assert not needs_axis_swap(45.0)
    assert not needs_axis_swap(90.0)
    assert not needs_axis_swap(135.0)
    assert needs_axis_swap(135.001)
    assert needs_axis_swap(179.0)


def test_detection_image_frame_properties():
    det = LineDetection(method="ols", rho=0.0, theta=0.0, slope=0.5,
                        intercept=3.0, axis_swapped=True, support=())
    # x = 0.5 y + 3  =>  y = 2 x - 6
    assert det.image_slope == pytest.approx(2.0)
    assert det.image_intercept == pytest.approx(-6.0)
    vert = LineDetection(method="ols", rho=7.0, theta=0.0, slope=0.0,
                         intercept=7.0, axis_swapped=True, support=())
    assert math.isinf(vert.image_slope)
    assert math.isnan(vert.image_intercept)
    plain = LineDetection(method="ols", rho=0.0, theta=90.0, slope=1.5,
                          intercept=-2.0, axis_swapped=False, support=())
    assert plain.image_slope == 1.5
    assert plain.image_intercept == -2.0


# ----------------------------------------------------------------- pipeline

def synth_image(**kw):
    spec = SyntheticSpec(**kw)
    return gen_synthetic(spec)


def test_detect_blank_image_returns_nothing():
    img = np.zeros((64, 64), dtype=np.uint8)
    params = HoughParams.for_image(64, 64, 5.0, 10.0)
    assert detect_lines(img, params) == []


def test_detect_lms_recovers_synthetic_line():
    image, truth = synth_image(slope=0.4, intercept=100.0,
                               sampling_prob=0.5, noise_prob=0.001, seed=3)
    params = HoughParams.for_image(1024, 1024, 20.0, 20.0)
    dets = detect_lines(image, params, method="lms")
    assert len(dets) == 1
    det = dets[0]
    assert det.method == "lms"
    assert not det.axis_swapped
    assert det.slope == pytest.approx(truth.slope, abs=0.02)
    assert det.intercept == pytest.approx(truth.intercept, abs=6.0)
    assert det.lms_value is not None and det.lms_value >= 0.0
    # The record keeps the whole bin; the cap only limits the solver input.
    assert len(det.support) > LMS_SUPPORT_CAP


def test_detect_steep_line_axis_swap_accuracy():
    image, truth = synth_image(endpoints=((512, 0), (512, 1023)),
                               sampling_prob=0.5, noise_prob=0.001, seed=5)
    params = HoughParams.for_image(1024, 1024, 20.0, 20.0)
    det = detect_lines(image, params, method="lms")[0]
    assert det.axis_swapped
    # Swapped frame: x = slope * y + intercept, truth is x = 512.
    assert det.slope == pytest.approx(0.0, abs=0.02)
    assert det.intercept == pytest.approx(512.0, abs=1.5)


def test_detect_sht_definitional_bound():
    image, truth = synth_image(slope=0.0, intercept=200.0,
                               sampling_prob=0.5, noise_prob=0.0, seed=8)
    params = HoughParams.for_image(1024, 1024, 20.0, 20.0)
    det = detect_lines(image, params, method="sht")[0]
    assert det.theta == pytest.approx(90.0)   # bin center hit exactly
    assert abs(det.rho - 200.0) <= params.delta_rho / 2
    assert det.lms_value is None
    assert det.slope == pytest.approx(0.0, abs=0.01)


def test_detect_ols_close_on_clean_line():
    image, truth = synth_image(slope=0.2, intercept=300.0,
                               sampling_prob=0.5, noise_prob=0.0, seed=11)
    params = HoughParams.for_image(1024, 1024, 20.0, 20.0)
    det = detect_lines(image, params, method="ols")[0]
    assert det.slope == pytest.approx(truth.slope, abs=0.02)
    assert det.intercept == pytest.approx(truth.intercept, abs=8.0)


def test_detect_max_peaks_two_crossing_lines():
    a, ta = synth_image(endpoints=((100, 100), (900, 900)),
                        sampling_prob=1.0, noise_prob=0.0, seed=1)
    b, tb = synth_image(endpoints=((100, 900), (900, 100)),
                        sampling_prob=1.0, noise_prob=0.0, seed=2)
    image = np.maximum(a, b)
    params = HoughParams.for_image(1024, 1024, 20.0, 2.0)
    dets = detect_lines(image, params, method="lms", max_peaks=2)
    assert len(dets) == 2
    slopes = sorted(d.image_slope for d in dets)
    assert slopes[0] == pytest.approx(-1.0, abs=0.03)
    assert slopes[1] == pytest.approx(1.0, abs=0.03)


def test_detect_rejects_unknown_method():
    img = np.zeros((8, 8), dtype=np.uint8)
    params = HoughParams.for_image(8, 8, 1.0, 10.0)
    with pytest.raises(InvalidInputError):
        detect_lines(img, params, method="ransac")


def test_detect_deterministic():
    image, _ = synth_image(slope=0.3, intercept=150.0,
                           sampling_prob=0.5, noise_prob=0.002, seed=19)
    params = HoughParams.for_image(1024, 1024, 20.0, 20.0)
    first = detect_lines(image, params, method="lms")
    second = detect_lines(image, params, method="lms")
    assert first == second
