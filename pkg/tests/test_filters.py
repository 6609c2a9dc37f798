import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admd.filters import (
    LOG_SIGMAS,
    StructuringElement,
    box_mean,
    dilate,
    directional_max_se,
    erode,
    integral_image,
    log_filter,
    log_kernel,
    opening,
)


def clamp(v, lo, hi):
    return min(max(v, lo), hi)


def naive_box_mean(img, side):
    h, w = img.shape
    r = side // 2
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            total = 0.0
            for u in range(-r, r + 1):
                for v in range(-r, r + 1):
                    total += img[clamp(i + u, 0, h - 1), clamp(j + v, 0, w - 1)]
            out[i, j] = total / side ** 2
    return out


def naive_dilate(img, offsets):
    h, w = img.shape
    out = np.empty((h, w))
    for i in range(h):
        for j in range(w):
            out[i, j] = max(img[clamp(i + dy, 0, h - 1), clamp(j + dx, 0, w - 1)]
                            for dy, dx in offsets)
    return out


@st.composite
def images(draw, min_side=1, max_side=12, integer=False):
    h = draw(st.integers(min_side, max_side))
    w = draw(st.integers(min_side, max_side))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    if integer:
        return rng.integers(0, 256, (h, w)).astype(np.float64)
    return rng.uniform(0, 255, (h, w))


@st.composite
def sparse_elements(draw, radius=3, anchor=False):
    pts = draw(st.sets(st.tuples(st.integers(-radius, radius), st.integers(-radius, radius)),
                       min_size=1, max_size=10))
    if anchor:
        pts.add((0, 0))
    return StructuringElement(tuple(sorted(pts)))


# --- structuring elements --------------------------------------------

def test_se_rejects_empty_and_duplicates():
    with pytest.raises(ValueError):
        StructuringElement(())
    with pytest.raises(ValueError):
        StructuringElement(((0, 1), (0, 1)))


def test_directional_se_cell3_matches_sparse_9x9_footprint():
    # 9x9 footprint with eight ones on the border and centre lines, anchor empty
    mask = np.zeros((9, 9), bool)
    for y in (1, 4, 7):
        for x in (1, 4, 7):
            mask[y, x] = True
    mask[4, 4] = False
    se = directional_max_se(3)
    assert len(se) == 8
    assert se.radius == 3
    assert (0, 0) not in se.offsets
    np.testing.assert_array_equal(se.to_mask()[0:7, 0:7], mask[1:8, 1:8])


def test_directional_se_cell5():
    assert set(directional_max_se(5).offsets) == {
        (-5, 0), (5, 0), (0, -5), (0, 5), (-5, -5), (-5, 5), (5, -5), (5, 5)}


@pytest.mark.parametrize("cell", [3, 5, 7, 9, 11, 21])
def test_directional_se_always_eight(cell):
    se = directional_max_se(cell)
    assert len(se) == 8
    assert all(max(abs(dy), abs(dx)) == cell for dy, dx in se.offsets)


@pytest.mark.parametrize("cell", [2, 4, 1, 0, -3])
def test_directional_se_rejects(cell):
    with pytest.raises(ValueError):
        directional_max_se(cell)


# --- box mean ----------------------------------------------------------

def test_integral_image_border_zeros():
    t = integral_image(np.ones((3, 4)))
    assert (t[0] == 0).all() and (t[:, 0] == 0).all()
    assert t[-1, -1] == 12


def test_box_mean_side1_identity():
    img = np.random.default_rng(0).uniform(0, 255, (6, 5)).astype(np.float32)
    np.testing.assert_array_equal(box_mean(img, 1), img)


def test_box_mean_constant():
    np.testing.assert_allclose(box_mean(np.full((7, 9), 13.0), 5), 13.0, rtol=0, atol=1e-12)


def test_box_mean_3x3_against_naive():
    img = np.arange(1, 10, dtype=np.float64).reshape(3, 3)
    out = box_mean(img, 3)
    assert out[1, 1] == 5.0
    np.testing.assert_allclose(out, naive_box_mean(img, 3), rtol=1e-12)


@pytest.mark.parametrize("side", [0, 2, -1, 4])
def test_box_mean_rejects_bad_side(side):
    with pytest.raises(ValueError):
        box_mean(np.zeros((5, 5)), side)


@settings(max_examples=60, deadline=None)
@given(images(min_side=3), st.sampled_from([1, 3, 5]))
def test_box_mean_matches_naive(img, side):
    if side > min(img.shape):
        return
    ref = naive_box_mean(img, side)
    np.testing.assert_allclose(box_mean(img, side), ref, rtol=1e-4, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(images(min_side=5), images(min_side=5), st.floats(-3, 3), st.floats(-3, 3))
def test_box_mean_linear(x, y, a, b):
    h, w = min(x.shape[0], y.shape[0]), min(x.shape[1], y.shape[1])
    x, y = x[:h, :w], y[:h, :w]
    lhs = box_mean(a * x + b * y, 5)
    rhs = a * box_mean(x, 5) + b * box_mean(y, 5)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-4, atol=1e-4 * 255 * (abs(a) + abs(b)))


# --- dilation / erosion / opening -------------------------------------

def test_dilate_anchor_only_identity():
    img = np.random.default_rng(1).uniform(size=(4, 6))
    np.testing.assert_array_equal(dilate(img, StructuringElement(((0, 0),))), img)


def test_dilate_constant():
    np.testing.assert_array_equal(dilate(np.full((5, 5), 3.0), StructuringElement.square(3)), 3.0)


def test_dilate_hand_example():
    img = np.array([[1.0, 9.0, 2.0]])
    se = StructuringElement(((0, -1), (0, 1)))
    # left: max(1 replicated, 9) = 9; centre: max(1, 2) = 2; right: max(9, 2 replicated) = 9
    np.testing.assert_array_equal(dilate(img, se), [[9, 2, 9]])


def test_dilate_rejects_oversized_element():
    with pytest.raises(ValueError):
        dilate(np.zeros((3, 3)), StructuringElement(((3, 0),)))


@settings(max_examples=80, deadline=None)
@given(images(min_side=4), sparse_elements())
def test_dilate_matches_naive(img, se):
    if se.radius >= min(img.shape):
        return
    np.testing.assert_array_equal(dilate(img, se), naive_dilate(img, se.offsets))


@settings(max_examples=100, deadline=None)
@given(images(min_side=4), sparse_elements())
def test_erode_dilate_duality(img, se):
    if se.radius >= min(img.shape):
        return
    np.testing.assert_array_equal(erode(img, se), -dilate(-img, se.reflect()))


@settings(max_examples=100, deadline=None)
@given(images(min_side=4), sparse_elements(anchor=True))
def test_erode_identity_dilate_ordering(img, se):
    if se.radius >= min(img.shape):
        return
    assert (erode(img, se) <= img).all()
    assert (img <= dilate(img, se)).all()


@st.composite
def rectangles(draw):
    return StructuringElement.rectangle(draw(st.sampled_from([1, 3, 5])),
                                        draw(st.sampled_from([1, 3, 5])))


@settings(max_examples=100, deadline=None)
@given(images(min_side=3, integer=True), rectangles())
def test_opening_anti_extensive_and_idempotent(img, se):
    if se.radius >= min(img.shape):
        return
    once = opening(img, se)
    assert (once <= img).all()
    np.testing.assert_array_equal(opening(once, se), once)


def test_opening_constant():
    np.testing.assert_array_equal(opening(np.full((6, 6), 4.0), StructuringElement.square(3)), 4.0)


def test_opening_removes_isolated_spike():
    img = np.zeros((5, 5))
    img[2, 2] = 10
    np.testing.assert_array_equal(opening(img, StructuringElement.square(3)), 0.0)


def test_opening_keeps_wide_plateau():
    img = np.zeros((15, 15))
    img[3:12, 3:12] = 7
    np.testing.assert_array_equal(opening(img, StructuringElement.square(3)), img)


# --- LoG ---------------------------------------------------------------

def test_log_grid_has_twelve_scales():
    assert len(LOG_SIGMAS) == 12
    assert LOG_SIGMAS[0] == 1.0
    assert math.isclose(LOG_SIGMAS[-1], 1.26 ** 11)


@pytest.mark.parametrize("sigma", [0.8, 1.0, 2.5])
def test_log_kernel_zero_mean_and_positive_centre(sigma):
    k = log_kernel(sigma)
    r = math.ceil(3 * sigma)
    assert k.shape == (2 * r + 1, 2 * r + 1)
    assert abs(k.sum()) < 1e-12
    assert k[r, r] == k.max() > 0
    np.testing.assert_allclose(k, k.T, atol=1e-15)


def test_log_kernel_formula():
    sigma = 1.3
    k = log_kernel(sigma)
    r = math.ceil(3 * sigma)
    y, x = np.mgrid[-r:r + 1, -r:r + 1].astype(float)
    rr = x * x + y * y
    g = np.exp(-rr / (2 * sigma ** 2)) / (2 * np.pi * sigma ** 2)
    ref = -(sigma ** 2) * (rr - 2 * sigma ** 2) / sigma ** 4 * g
    np.testing.assert_allclose(k, ref - ref.mean(), atol=1e-14)


def test_log_filter_constant_is_zero():
    out = log_filter(np.full((40, 40), 123.0), 2.0)
    np.testing.assert_allclose(out, 0.0, atol=1e-9)


@pytest.mark.parametrize("sigma", [1.0, 1.6])
def test_log_filter_impulse_response_is_kernel(sigma):
    img = np.zeros((41, 41))
    img[20, 20] = 1.0
    k = log_kernel(sigma)
    r = k.shape[0] // 2
    np.testing.assert_allclose(log_filter(img, sigma)[20 - r:21 + r, 20 - r:21 + r], k,
                               atol=1e-12)


def test_log_filter_scale_selection_on_gaussian_blob():
    sigma0 = 3.0
    y, x = np.mgrid[:81, :81].astype(float)
    blob = np.exp(-((x - 40) ** 2 + (y - 40) ** 2) / (2 * sigma0 ** 2))
    sweep = np.arange(1.5, 6.01, 0.25)
    responses = [log_filter(blob, s)[40, 40] for s in sweep]
    assert abs(sweep[int(np.argmax(responses))] - sigma0) <= 0.25


def test_log_filter_rejects_sigma():
    with pytest.raises(ValueError):
        log_filter(np.zeros((5, 5)), 0.0)
