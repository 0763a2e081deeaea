"""Bilinear resampling against an independently written per-pixel oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bilinear_resize_oracle
from tzr.imageops import bilinear_resize, resize_image_u8


def test_constant_image_stays_constant():
    out = bilinear_resize(np.full((16, 16), 0.5), 256, 256)
    assert out.shape == (256, 256)
    assert np.allclose(out, 0.5)


def test_single_sample_extends_everywhere():
    out = bilinear_resize(np.array([[0.3]]), 7, 11)
    assert np.allclose(out, 0.3)


def test_column_ramp_matches_oracle():
    src = np.array([[0.0, 1.0], [0.0, 1.0]])
    out = bilinear_resize(src, 4, 4)
    expected = bilinear_resize_oracle(src, 4, 4)
    assert np.allclose(out, expected)
    assert np.allclose(out, out[0])  # every row identical: pure column ramp
    assert np.all(np.diff(out[0]) >= 0)


def test_identity_resize_returns_same_values():
    rng = np.random.default_rng(0)
    src = rng.uniform(size=(9, 13))
    assert np.allclose(bilinear_resize(src, 9, 13), src)


@pytest.mark.parametrize("shape,out_hw", [((5, 7), (11, 3)), ((12, 4), (6, 17)), ((3, 3), (8, 8))])
def test_grayscale_matches_oracle(shape, out_hw):
    rng = np.random.default_rng(42)
    src = rng.uniform(size=shape)
    got = bilinear_resize(src, *out_hw)
    want = bilinear_resize_oracle(src, *out_hw)
    assert np.allclose(got, want, atol=1e-12)


def test_multichannel_matches_oracle():
    rng = np.random.default_rng(7)
    src = rng.uniform(size=(6, 5, 3))
    got = bilinear_resize(src, 13, 9)
    want = bilinear_resize_oracle(src, 13, 9)
    assert got.shape == (13, 9, 3)
    assert np.allclose(got, want, atol=1e-12)


@settings(max_examples=30)
@given(
    st.integers(1, 12),
    st.integers(1, 12),
    st.integers(1, 24),
    st.integers(1, 24),
    st.integers(0, 2**32 - 1),
)
def test_random_sizes_match_oracle(in_h, in_w, out_h, out_w, seed):
    src = np.random.default_rng(seed).uniform(size=(in_h, in_w))
    got = bilinear_resize(src, out_h, out_w)
    want = bilinear_resize_oracle(src, out_h, out_w)
    assert np.allclose(got, want, atol=1e-12)


@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_interpolation_stays_within_input_range(in_h, in_w, seed):
    src = np.random.default_rng(seed).uniform(size=(in_h, in_w))
    out = bilinear_resize(src, 3 * in_h, 3 * in_w)
    assert out.min() >= src.min() - 1e-12
    assert out.max() <= src.max() + 1e-12


def test_uint8_resize_rounds_and_casts():
    src = np.array([[[10, 0, 255], [20, 0, 255]]], dtype=np.uint8)
    out = resize_image_u8(src, 1, 1)
    assert out.dtype == np.uint8
    assert out.shape == (1, 1, 3)
    assert tuple(out[0, 0]) == (15, 0, 255)  # midpoint of 10/20 rounds to 15 (banker's-free rint on .0 is exact here)


def test_uint8_resize_preserves_identity():
    rng = np.random.default_rng(5)
    src = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
    assert np.array_equal(resize_image_u8(src, 8, 8), src)
