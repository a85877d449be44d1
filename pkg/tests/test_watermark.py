import numpy as np
import pytest

from shearmark import metrics, synthetic
from shearmark.bsvd import svd
from shearmark.errors import InvalidConfigError, InvalidInputError, InvalidSelectorError
from shearmark.shearlet import SubbandSelector
from shearmark.watermark import (DEFAULT_ALPHA, EmbedConfig, Scheme, embed,
                                 embedding_matrix, extract)

SCHEMES = list(Scheme)


def test_core_algebra_oracle(rng):
    """(U_w S_w V_w^T - S) / alpha recovers W exactly when the factors are exact."""
    s = np.sort(rng.uniform(1, 50, size=8))[::-1]
    w = rng.uniform(0, 255, size=(8, 8))
    alpha = 0.01
    core = np.diag(s) + alpha * w
    u_w, s_w, v_w = svd(core)
    np.testing.assert_allclose(u_w.T @ u_w, np.eye(8), atol=1e-12)
    np.testing.assert_allclose(v_w.T @ v_w, np.eye(8), atol=1e-12)
    recovered = ((u_w * s_w) @ v_w.T - np.diag(s)) / alpha
    np.testing.assert_allclose(recovered, w, atol=1e-9)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_embedding_matrix_shape(scheme, scene128):
    m = embedding_matrix(scene128, EmbedConfig(scheme=scheme))
    expected = (128, 128) if scheme == Scheme.DST_ONLY else (64, 64)
    assert m.shape == expected
    assert EmbedConfig(scheme=scheme).embedding_shape((128, 128)) == expected


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_zero_watermark_returns_host(scheme, scene128):
    marked, key = embed(scene128, np.zeros((64, 64)), EmbedConfig(scheme=scheme))
    rel = np.linalg.norm(marked - scene128) / np.linalg.norm(scene128)
    assert rel < 1e-7
    assert marked.shape == scene128.shape
    np.testing.assert_allclose(key.u_w.T @ key.u_w, np.eye(key.u_w.shape[0]), atol=1e-8)
    np.testing.assert_allclose(key.v_w.T @ key.v_w, np.eye(key.v_w.shape[0]), atol=1e-8)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_embed_extract_linear_regime(scheme, scene128, logo64):
    """Doubling a small alpha doubles the host distortion."""
    norms = [np.linalg.norm(embed(scene128, logo64, EmbedConfig(alpha=a, scheme=scheme))[0]
                            - scene128) for a in (1e-5, 2e-5)]
    assert norms[1] / norms[0] == pytest.approx(2.0, rel=0.05)


@pytest.mark.xfail(strict=True, reason="alpha=0.004..0.008 is outside the first-order regime: "
                   "alpha*W exceeds the spacing of the small singular values")
def test_alpha_doubling_at_working_strength(scene128, logo64):
    norms = [np.linalg.norm(embed(scene128, logo64, EmbedConfig(alpha=a))[0] - scene128)
             for a in (0.004, 0.008)]
    assert norms[1] / norms[0] == pytest.approx(2.0, rel=0.05)


def test_dwt_only_roundtrip_is_exact(scene128, logo64):
    marked, key = embed(scene128, logo64, EmbedConfig(scheme=Scheme.DWT_ONLY))
    w = extract(marked, key)
    assert w.shape == logo64.shape
    assert np.abs(w - logo64).max() < 1e-6
    assert metrics.nc(logo64, w) > 0.9999


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_transparency(scheme, scene128, logo64):
    marked, _ = embed(scene128, logo64, EmbedConfig(scheme=scheme))
    assert metrics.psnr(scene128, marked) >= 55.0
    assert metrics.ssim(scene128, marked) >= 0.995


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_extraction_is_deterministic(scheme, scene128, logo64):
    marked, key = embed(scene128, logo64, EmbedConfig(scheme=scheme))
    a, b = extract(marked, key), extract(marked.copy(), key)
    assert a.tobytes() == b.tobytes()


def test_extracted_mark_is_correlated(scene128, logo64):
    # the hybrid schemes lose part of the mark to the frame projection but stay well above chance
    for scheme in SCHEMES:
        marked, key = embed(scene128, logo64, EmbedConfig(scheme=scheme))
        assert metrics.nc(logo64, extract(marked, key)) > 0.4


@pytest.mark.xfail(strict=True, reason="the key alone carries most of the watermark: "
                   "extracting from the unmarked host still correlates strongly")
@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_unmarked_host_is_not_detected(scheme):
    host = synthetic.host("scene", 256)
    wm = synthetic.logo(128)
    _, key = embed(host, wm, EmbedConfig(scheme=scheme))
    assert metrics.nc(wm, extract(host, key)) < 0.5


def test_unrelated_image_gives_low_nc(scene128, logo64):
    _, key = embed(scene128, logo64, EmbedConfig(scheme=Scheme.DWT_ONLY))
    noise = np.random.default_rng(5).uniform(0, 255, size=scene128.shape)
    assert abs(metrics.nc(logo64, extract(noise, key))) < 0.5


def test_db4_and_other_selector(scene128, logo64):
    cfg = EmbedConfig(wavelet="db4", selector=SubbandSelector(3, "h", 1))
    marked, key = embed(scene128, logo64, cfg)
    assert metrics.psnr(scene128, marked) > 55
    assert metrics.nc(logo64, extract(marked, key)) > 0.5


def test_full_size_watermark(scene128):
    wm = synthetic.logo(64)
    marked, key = embed(scene128, wm, EmbedConfig(scheme=Scheme.DWT_ONLY))
    assert key.s.shape == (64,) and (key.wm_rows, key.wm_cols) == (64, 64)


def test_config_validation():
    assert EmbedConfig().alpha == DEFAULT_ALPHA == 0.008
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(InvalidConfigError):
            EmbedConfig(alpha=bad)
    with pytest.raises(InvalidConfigError):
        EmbedConfig(n_scales=2)
    with pytest.raises(InvalidConfigError):
        EmbedConfig(wavelet="coif9")
    with pytest.raises(InvalidConfigError):
        Scheme.parse("fourier")
    assert Scheme.parse("dwt-bsvd") == Scheme.DWT_ONLY
    assert Scheme.parse("hybrid") == Scheme.DWT_DST


def test_input_validation(scene128, logo64):
    with pytest.raises(InvalidInputError):
        embed(scene128, np.zeros((65, 65)))
    with pytest.raises(InvalidInputError):
        embed(scene128, np.zeros((32, 16)))
    with pytest.raises(InvalidInputError):
        embed(scene128[:127, :], logo64)
    _, key = embed(scene128, logo64)
    with pytest.raises(InvalidInputError):
        extract(scene128[:64, :64], key)
    with pytest.raises(InvalidSelectorError):
        embed(scene128, logo64, EmbedConfig(selector=SubbandSelector(1, "v", 3)))
