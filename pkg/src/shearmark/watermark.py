"""Watermark embedding and extraction in bidiagonal singular values.

The hybrid scheme decomposes the host with a one-level DWT, runs the
shearlet transform on the LL band, takes the BSVD of one shearlet plane
``A = U_A U_B diag(s) V_B^T V_A^T`` and embeds the watermark ``W`` as

    diag(s) + alpha * W = U_w diag(s_w) V_w^T
    A_new = U_A U_B diag(s_w) V_B^T V_A^T

before inverting both transforms. Extraction repeats the forward chain on
the received image to get ``s*`` and returns
``(U_w diag(s*) V_w^T - diag(s)) / alpha`` using ``s``, ``U_w``, ``V_w`` and
``alpha`` from the key.

Two reduced schemes reuse the same algebra: ``DWT_ONLY`` embeds in the LL
band directly and ``DST_ONLY`` embeds in a shearlet plane of the raw
image.
"""

from dataclasses import dataclass
import enum
from functools import lru_cache

import numpy as np

from . import bsvd as _bsvd
from .errors import InvalidConfigError, InvalidInputError
from .image import as_image
from .shearlet import (DEFAULT_SELECTOR, ShearletSystem, SubbandSelector,
                       dst_forward, dst_inverse, replace_subband, select_subband)
from .wavelet import dwt_forward, dwt_inverse, get_filter

DEFAULT_ALPHA = 0.008


class Scheme(enum.IntEnum):
    DWT_DST = 0
    DWT_ONLY = 1
    DST_ONLY = 2

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        key = text.strip().upper().replace("-", "_")
        aliases = {"DWT_DST": cls.DWT_DST, "HYBRID": cls.DWT_DST,
                   "DWT_ONLY": cls.DWT_ONLY, "DWT": cls.DWT_ONLY, "DWT_BSVD": cls.DWT_ONLY,
                   "DST_ONLY": cls.DST_ONLY, "DST": cls.DST_ONLY, "DST_BSVD": cls.DST_ONLY}
        try:
            return aliases[key]
        except KeyError:
            raise InvalidConfigError(f"unknown scheme {text!r}") from None


@dataclass(frozen=True)
class EmbedConfig:
    alpha: float = DEFAULT_ALPHA
    scheme: Scheme = Scheme.DWT_DST
    wavelet: str = "haar"
    n_scales: int = 3
    shear_levels: tuple = (0, 1, 1)
    selector: SubbandSelector = DEFAULT_SELECTOR

    def __post_init__(self):
        object.__setattr__(self, "shear_levels", tuple(int(k) for k in self.shear_levels))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise InvalidConfigError(f"alpha must be positive, got {self.alpha}")
        if self.n_scales < 1 or len(self.shear_levels) != self.n_scales:
            raise InvalidConfigError(
                f"need n_scales >= 1 shear levels, got n_scales={self.n_scales} "
                f"levels={list(self.shear_levels)}")
        get_filter(self.wavelet)

    def embedding_shape(self, host_shape: tuple) -> tuple:
        """Shape of the matrix that carries the watermark."""
        rows, cols = host_shape
        if self.scheme == Scheme.DST_ONLY:
            return (rows, cols)
        return (rows // 2, cols // 2)


@dataclass(frozen=True, eq=False)
class WatermarkKey:
    """Side information needed to extract a watermark."""

    config: EmbedConfig
    s: np.ndarray
    u_w: np.ndarray
    v_w: np.ndarray
    wm_rows: int
    wm_cols: int
    host_rows: int
    host_cols: int
    format_version: int = 1

    def __eq__(self, other):
        if not isinstance(other, WatermarkKey):
            return NotImplemented
        return (self.config == other.config
                and (self.wm_rows, self.wm_cols, self.host_rows, self.host_cols,
                     self.format_version)
                == (other.wm_rows, other.wm_cols, other.host_rows, other.host_cols,
                    other.format_version)
                and all(np.array_equal(a, b) for a, b in
                        ((self.s, other.s), (self.u_w, other.u_w), (self.v_w, other.v_w))))


@lru_cache(maxsize=8)
def _system(rows: int, cols: int, n_scales: int, shear_levels: tuple) -> ShearletSystem:
    return ShearletSystem(rows, cols, n_scales, shear_levels)


@dataclass
class _Decomposition:
    config: EmbedConfig
    matrix: np.ndarray
    bands: object = None
    coeffs: object = None


def _forward(image: np.ndarray, config: EmbedConfig) -> _Decomposition:
    if config.scheme == Scheme.DST_ONLY:
        system = _system(*image.shape, config.n_scales, config.shear_levels)
        coeffs = dst_forward(image, system)
        return _Decomposition(config, select_subband(coeffs, config.selector), coeffs=coeffs)
    bands = dwt_forward(image, get_filter(config.wavelet))
    if config.scheme == Scheme.DWT_ONLY:
        return _Decomposition(config, bands.ll.copy(), bands=bands)
    system = _system(*bands.shape, config.n_scales, config.shear_levels)
    coeffs = dst_forward(bands.ll, system)
    return _Decomposition(config, select_subband(coeffs, config.selector),
                          bands=bands, coeffs=coeffs)


def _inverse(dec: _Decomposition, matrix: np.ndarray) -> np.ndarray:
    scheme = dec.config.scheme
    if scheme == Scheme.DWT_ONLY:
        return dwt_inverse(dec.bands.replace(ll=matrix))
    coeffs = replace_subband(dec.coeffs, dec.config.selector, matrix)
    if scheme == Scheme.DST_ONLY:
        return dst_inverse(coeffs)
    return dwt_inverse(dec.bands.replace(ll=dst_inverse(coeffs)))


def embedding_matrix(image, config: EmbedConfig = EmbedConfig()) -> np.ndarray:
    """The matrix whose singular values carry the watermark."""
    return _forward(as_image(image, "image"), config).matrix


def embed(host, wm, config: EmbedConfig = EmbedConfig()):
    """Embed watermark `wm` into `host`.

    Parameters
    ----------
    host : array_like
        Gray-scale host, even dimensions.
    wm : array_like
        Square watermark no larger than ``r = min`` of the embedding
        matrix shape (half the host size for the DWT schemes, the host
        size for ``DST_ONLY``). A smaller mark is zero-padded into the
        top-left corner of the r x r core. Pixel values are used as-is
        (0-255 scale).
    config : EmbedConfig

    Returns
    -------
    watermarked : ndarray
        Float64 image, same shape as `host`, not quantized.
    key : WatermarkKey
    """
    host = as_image(host, "host")
    wm = as_image(wm, "watermark")
    if host.shape[0] % 2 or host.shape[1] % 2:
        raise InvalidInputError(f"host dimensions must be even, got {host.shape}")
    dec = _forward(host, config)
    factors = _bsvd.bsvd(dec.matrix)
    s = factors.s
    r = s.shape[0]
    if wm.shape[0] != wm.shape[1] or wm.shape[0] > r:
        raise InvalidInputError(
            f"watermark must be square and at most {r}x{r} for an embedding matrix "
            f"of shape {dec.matrix.shape}, got {wm.shape}")
    core = np.diag(s)
    core[:wm.shape[0], :wm.shape[1]] += config.alpha * wm
    u_w, s_w, v_w = _bsvd.svd(core)
    watermarked = _inverse(dec, _bsvd.compose(factors, s_w))
    key = WatermarkKey(config=config, s=s.copy(), u_w=u_w, v_w=v_w,
                       wm_rows=wm.shape[0], wm_cols=wm.shape[1],
                       host_rows=host.shape[0], host_cols=host.shape[1])
    return watermarked, key


def extract(image, key: WatermarkKey) -> np.ndarray:
    """Recover the watermark from a (possibly attacked) image."""
    image = as_image(image, "image")
    if image.shape != (key.host_rows, key.host_cols):
        raise InvalidInputError(
            f"image is {image.shape}, key expects {(key.host_rows, key.host_cols)}")
    s_star = _bsvd.bsvd(_forward(image, key.config).matrix).s
    if s_star.shape != key.s.shape:
        raise InvalidInputError("key does not match the image's embedding matrix")
    d_star = (key.u_w * s_star) @ key.v_w.T
    w = (d_star - np.diag(key.s)) / key.config.alpha
    return w[:key.wm_rows, :key.wm_cols].copy()
