import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lanetune.imaging import normalize_to_u8, round_half_up, to_grayscale, to_u8, validate_frame


def frames(min_side=3, max_side=12):
    shape = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side), st.just(3))
    return arrays(np.uint8, shape)


def test_round_half_up_ties_go_up():
    assert round_half_up([0.5, 1.5, 2.5, -0.5, -1.5, 0.49999]).tolist() == [1, 2, 3, 0, -1, 0]


def test_to_u8_saturates():
    assert to_u8([-3.0, 255.4, 255.5, 300.0]).tolist() == [0, 255, 255, 255]


def test_white_and_black_frames():
    assert (to_grayscale(np.full((4, 5, 3), 255, np.uint8)) == 255).all()
    assert (to_grayscale(np.zeros((4, 5, 3), np.uint8)) == 0).all()


def test_luma_uses_bgr_order():
    frame = np.zeros((3, 3, 3), np.uint8)
    frame[...] = (200, 150, 100)  # B, G, R
    expected = int(np.floor(0.299 * 100 + 0.587 * 150 + 0.114 * 200 + 0.5))
    assert expected == 141
    assert (to_grayscale(frame) == 141).all()


def test_pure_planes():
    for plane, weight in ((0, 0.114), (1, 0.587), (2, 0.299)):
        frame = np.zeros((3, 3, 3), np.uint8)
        frame[..., plane] = 255
        assert to_grayscale(frame)[0, 0] == np.floor(255 * weight + 0.5)


def test_float_grayscale_is_unrounded():
    frame = np.zeros((3, 3, 3), np.uint8)
    frame[..., 2] = 1
    assert to_grayscale(frame, as_u8=False)[0, 0] == pytest.approx(0.299)


@pytest.mark.parametrize("bad", [
    np.zeros((4, 4), np.uint8),
    np.zeros((4, 4, 4), np.uint8),
    np.zeros((4, 4, 3), np.float32),
    np.zeros((2, 9, 3), np.uint8),
])
def test_validate_frame_rejects(bad):
    with pytest.raises(ValueError):
        validate_frame(bad)


@given(frames())
def test_grayscale_shape_and_convexity(frame):
    g = to_grayscale(frame)
    assert g.shape == frame.shape[:2]
    assert g.dtype == np.uint8
    assert (g >= frame.min(axis=2)).all() and (g <= frame.max(axis=2)).all()


def test_normalize_tiny_range():
    assert normalize_to_u8(np.array([0.0, 5e-324])).tolist() == [0, 255]


def test_normalize_examples():
    edges = np.array([[0, 1], [1, 0]], dtype=bool)
    assert normalize_to_u8(edges).tolist() == [[0, 255], [255, 0]]
    assert normalize_to_u8(np.array([[0, 1], [1, 0]])).tolist() == [[0, 255], [255, 0]]
    assert (normalize_to_u8(np.full((3, 3), 7.3)) == 0).all()
    assert normalize_to_u8(np.array([0.0, 0.5, 1.0])).tolist() == [0, 128, 255]
    assert (normalize_to_u8(np.zeros((2, 2), bool)) == 0).all()
    assert (normalize_to_u8(np.ones((2, 2), bool)) == 0).all()


@given(arrays(np.float64, st.integers(2, 40), elements=st.floats(-1e6, 1e6)))
def test_normalize_is_monotone(values):
    out = normalize_to_u8(values)
    order = np.argsort(values, kind="stable")
    assert (np.diff(out[order].astype(int)) >= 0).all()
    if values.max() > values.min():
        assert out.min() == 0 and out.max() == 255
