import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from shearmark.errors import InvalidConfigError, InvalidInputError
from shearmark.wavelet import (DB4, FILTERS, HAAR, SubbandSet, WaveletFilterPair,
                               dwt_forward, dwt_inverse, get_filter)


def analysis_matrices(f: WaveletFilterPair, n: int):
    """Dense periodic lowpass/highpass analysis operators, built entry by entry."""
    lo = np.zeros((n // 2, n))
    hi = np.zeros((n // 2, n))
    for row in range(n // 2):
        for k in range(f.scaling_filter.size):
            lo[row, (2 * row + k) % n] += f.scaling_filter[k]
            hi[row, (2 * row + k) % n] += f.wavelet_filter[k]
    return lo, hi


@pytest.mark.parametrize("filt", [HAAR, DB4], ids=lambda f: f.name)
@pytest.mark.parametrize("shape", [(8, 8), (16, 12), (32, 64)])
def test_forward_matches_dense_operator(filt, shape, rng):
    x = rng.normal(size=shape)
    row_lo, row_hi = analysis_matrices(filt, shape[1])
    col_lo, col_hi = analysis_matrices(filt, shape[0])
    bands = dwt_forward(x, filt)
    np.testing.assert_allclose(bands.ll, col_lo @ x @ row_lo.T, atol=1e-12)
    np.testing.assert_allclose(bands.lh, col_hi @ x @ row_lo.T, atol=1e-12)
    np.testing.assert_allclose(bands.hl, col_lo @ x @ row_hi.T, atol=1e-12)
    np.testing.assert_allclose(bands.hh, col_hi @ x @ row_hi.T, atol=1e-12)


@pytest.mark.parametrize("filt", [HAAR, DB4], ids=lambda f: f.name)
def test_dense_operator_is_orthogonal(filt):
    lo, hi = analysis_matrices(filt, 32)
    full = np.vstack([lo, hi])
    np.testing.assert_allclose(full @ full.T, np.eye(32), atol=1e-13)


def test_haar_constant_image():
    bands = dwt_forward(np.full((16, 16), 7.0))
    np.testing.assert_allclose(bands.ll, 14.0)
    for b in (bands.lh, bands.hl, bands.hh):
        np.testing.assert_allclose(b, 0.0, atol=1e-13)


def test_subband_orientation():
    # intensity varies down the rows only: horizontal lowpass, vertical highpass
    x = np.tile(np.array([0.0, 1.0] * 8)[:, None], (1, 16))
    bands = dwt_forward(x)
    assert np.abs(bands.lh).max() > 0.5
    assert np.abs(bands.hl).max() < 1e-13


@pytest.mark.parametrize("filt", [HAAR, DB4], ids=lambda f: f.name)
def test_perfect_reconstruction_and_energy(filt, rng):
    x = rng.uniform(0, 255, size=(64, 48))
    bands = dwt_forward(x, filt)
    assert np.abs(dwt_inverse(bands) - x).max() < 1e-10 * np.abs(x).max()
    energy = sum(np.sum(b ** 2) for b in (bands.ll, bands.lh, bands.hl, bands.hh))
    assert energy == pytest.approx(np.sum(x ** 2), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, st.tuples(st.sampled_from([2, 4, 10, 16]), st.sampled_from([2, 6, 8])),
              elements=st.floats(-1e3, 1e3)))
def test_reconstruction_property(x):
    for filt in FILTERS.values():
        y = dwt_inverse(dwt_forward(x, filt))
        assert np.abs(y - x).max() <= 1e-10 * max(np.abs(x).max(), 1.0)


def test_linearity(rng):
    x, y = rng.normal(size=(2, 16, 16))
    a = dwt_forward(2.0 * x - 3.0 * y, DB4)
    bx, by = dwt_forward(x, DB4), dwt_forward(y, DB4)
    np.testing.assert_allclose(a.hh, 2.0 * bx.hh - 3.0 * by.hh, atol=1e-12)


def test_odd_dimensions_rejected():
    with pytest.raises(InvalidInputError):
        dwt_forward(np.zeros((15, 16)))


def test_nonfinite_rejected():
    x = np.zeros((8, 8))
    x[2, 3] = np.nan
    with pytest.raises(InvalidInputError):
        dwt_forward(x)


def test_unknown_filter():
    with pytest.raises(InvalidConfigError):
        get_filter("sym99")


def test_non_orthonormal_pair_rejected():
    with pytest.raises(InvalidConfigError):
        WaveletFilterPair.from_scaling("bad", [0.5, 0.5])


def test_mismatched_subbands_rejected():
    z = np.zeros((4, 4))
    with pytest.raises(InvalidInputError):
        SubbandSet(z, z, z, np.zeros((4, 5)))


def test_db4_vanishing_moments():
    k = np.arange(8)
    for p in range(4):
        assert abs(np.sum(k ** p * DB4.wavelet_filter)) < 1e-9
