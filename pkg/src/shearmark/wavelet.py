"""Single-level separable 2-D discrete wavelet transform.

Filtering uses periodic extension, so an M x N image maps to four
M/2 x N/2 subbands with no size growth and the orthonormal transform is
exactly invertible by its adjoint.

Subband names follow the row/column convention: the first letter is the
filter applied along each row (axis 1), the second the filter applied
along each column (axis 0). ``lh`` is therefore lowpass horizontally and
highpass vertically.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .image import as_image

_SQRT2 = np.sqrt(2.0)

# Daubechies orthonormal scaling filter with 4 vanishing moments (8 taps).
_DB4 = np.array([
    -0.010597401785069032105,
    0.032883011666885199735,
    0.030841381835560763627,
    -0.18703481171909308408,
    -0.027983769416859854211,
    0.63088076792985890788,
    0.71484657055291564709,
    0.23037781330889650086,
])


@dataclass(frozen=True, eq=False)
class WaveletFilterPair:
    """Orthonormal analysis filters (scaling and wavelet) of one family.

    Synthesis uses the same filters (the transform is its own adjoint
    inverse). Construction checks the double-shift orthonormality
    conditions numerically and rejects filters that fail them.
    """

    name: str
    scaling_filter: np.ndarray
    wavelet_filter: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.scaling_filter, dtype=np.float64)
        g = np.asarray(self.wavelet_filter, dtype=np.float64)
        if h.ndim != 1 or h.shape != g.shape or h.size % 2:
            raise InvalidConfigError(f"{self.name}: filters must be equal, even-length vectors")
        h.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "scaling_filter", h)
        object.__setattr__(self, "wavelet_filter", g)
        if not _is_orthonormal_pair(h, g):
            raise InvalidConfigError(f"{self.name}: filters do not form an orthonormal pair")

    @classmethod
    def from_scaling(cls, name: str, h) -> "WaveletFilterPair":
        """Build the pair from a scaling filter via the alternating flip."""
        h = np.asarray(h, dtype=np.float64)
        g = h[::-1] * (-1.0) ** np.arange(h.size)
        return cls(name, h, g)

    @property
    def length(self) -> int:
        return self.scaling_filter.size


def _is_orthonormal_pair(h: np.ndarray, g: np.ndarray, tol: float = 1e-13) -> bool:
    L = h.size
    for a, b, target in ((h, h, 1.0), (g, g, 1.0), (h, g, 0.0)):
        for shift in range(0, L, 2):
            dot = float(np.dot(a[shift:], b[:L - shift]))
            want = target if shift == 0 else 0.0
            if abs(dot - want) > tol:
                return False
            if shift and abs(float(np.dot(b[shift:], a[:L - shift]))) > tol:
                return False
    return True


HAAR = WaveletFilterPair.from_scaling("haar", [1 / _SQRT2, 1 / _SQRT2])
DB4 = WaveletFilterPair.from_scaling("db4", _DB4)

FILTERS = {f.name: f for f in (HAAR, DB4)}


def get_filter(name: str) -> WaveletFilterPair:
    try:
        return FILTERS[name.lower()]
    except KeyError:
        raise InvalidConfigError(
            f"unknown wavelet {name!r}; choose from {sorted(FILTERS)}") from None


@dataclass(frozen=True, eq=False)
class SubbandSet:
    """The four subbands of one decomposition level."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    filter: WaveletFilterPair = HAAR

    def __post_init__(self):
        shapes = {np.shape(b) for b in (self.ll, self.lh, self.hl, self.hh)}
        if len(shapes) != 1:
            raise InvalidInputError(f"subbands have mismatched shapes {sorted(shapes)}")
        if len(next(iter(shapes))) != 2:
            raise InvalidInputError("subbands must be 2-D")

    @property
    def shape(self) -> tuple:
        return self.ll.shape

    def replace(self, **bands) -> "SubbandSet":
        fields = dict(ll=self.ll, lh=self.lh, hl=self.hl, hh=self.hh, filter=self.filter)
        fields.update(bands)
        return SubbandSet(**fields)


def _analyze(x: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    # out[n] = sum_k f[k] * x[(2n + k) mod N] along `axis`
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    base = np.arange(0, n, 2)
    out = np.zeros(x.shape[:-1] + (n // 2,))
    for k, c in enumerate(f):
        out += c * x[..., (base + k) % n]
    return np.moveaxis(out, -1, axis)


def _synthesize(lo: np.ndarray, hi: np.ndarray, h: np.ndarray, g: np.ndarray,
                axis: int) -> np.ndarray:
    # adjoint of _analyze applied to both channels
    lo = np.moveaxis(lo, axis, -1)
    hi = np.moveaxis(hi, axis, -1)
    half = lo.shape[-1]
    n = 2 * half
    base = np.arange(0, n, 2)
    out = np.zeros(lo.shape[:-1] + (n,))
    for k in range(h.size):
        # indices are distinct for fixed k, so fancy-index += is safe
        out[..., (base + k) % n] += h[k] * lo + g[k] * hi
    return np.moveaxis(out, -1, axis)


def dwt_forward(image, filter: WaveletFilterPair = HAAR) -> SubbandSet:
    """One-level 2-D DWT of an even-sized image.

    Parameters
    ----------
    image : array_like
        2-D array with both dimensions even and at least 2.
    filter : WaveletFilterPair
        Orthonormal filter pair; Haar by default.

    Returns
    -------
    SubbandSet
        Subbands of shape (M/2, N/2).
    """
    x = as_image(image)
    if x.shape[0] % 2 or x.shape[1] % 2:
        raise InvalidInputError(f"image dimensions must be even, got {x.shape}")
    h, g = filter.scaling_filter, filter.wavelet_filter
    row_lo = _analyze(x, h, axis=1)
    row_hi = _analyze(x, g, axis=1)
    return SubbandSet(
        ll=_analyze(row_lo, h, axis=0),
        lh=_analyze(row_lo, g, axis=0),
        hl=_analyze(row_hi, h, axis=0),
        hh=_analyze(row_hi, g, axis=0),
        filter=filter,
    )


def dwt_inverse(bands: SubbandSet) -> np.ndarray:
    """Reconstruct the image whose forward transform is `bands`."""
    if not isinstance(bands, SubbandSet):
        raise InvalidInputError("expected a SubbandSet")
    h, g = bands.filter.scaling_filter, bands.filter.wavelet_filter
    ll, lh, hl, hh = (as_image(b, "subband", min_size=1) for b in
                      (bands.ll, bands.lh, bands.hl, bands.hh))
    row_lo = _synthesize(ll, lh, h, g, axis=0)
    row_hi = _synthesize(hl, hh, h, g, axis=0)
    return _synthesize(row_lo, row_hi, h, g, axis=1)
