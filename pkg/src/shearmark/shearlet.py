"""Non-subsampled cone-adapted discrete shearlet transform.

The system is a set of real, even frequency responses on the FFT grid of a
fixed image size: one lowpass plus, for every scale ``j`` with shear level
``k``, ``2**(k + 2)`` directional filters split between the horizontal cone
(``|fy| <= |fx|``) and the vertical cone (``|fx| <= |fy|``). Squared
responses sum to one at every frequency bin, so the transform is a Parseval
frame: synthesis is the adjoint and reconstructs exactly.

Radial windows are Meyer-type with smooth half-octave transitions around
the dyadic boundaries ``2**(j - n_scales)`` (Nyquist = 1). Angular windows
live on a pseudo-angle that runs once around the square frequency
boundary; shear offset ``s`` at level ``k`` centers a window on slope
``s / 2**k`` within its cone. The two seam directions (slope +-1) belong to
the vertical cone, so the horizontal cone carries ``2**(k+1) - 1`` shears
and the vertical cone ``2**(k+1) + 1``.

Plane order is lowpass first, then scale ascending (scale 1 is the
coarsest band-pass), cone horizontal before vertical, shear ascending.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, InvalidSelectorError
from .image import as_image

HORIZONTAL = "h"
VERTICAL = "v"
LOWPASS = "low"
_CONES = {"h": HORIZONTAL, "horizontal": HORIZONTAL,
          "v": VERTICAL, "vertical": VERTICAL,
          "low": LOWPASS, "lowpass": LOWPASS}

MIN_SIZE = 32


def _meyer_v(t: np.ndarray) -> np.ndarray:
    # smooth ramp with v(0)=0, v(1)=1 and v(t) + v(1-t) = 1
    t = np.clip(t, 0.0, 1.0)
    return t ** 4 * (35 - 84 * t + 70 * t ** 2 - 20 * t ** 3)


def _radial_lowpass(r: np.ndarray, boundary: float) -> np.ndarray:
    """Smooth cutoff at `boundary`, flat 1 below b/sqrt(2), 0 above b*sqrt(2)."""
    out = np.ones_like(r)
    pos = r > 0
    u = np.log2(r[pos] / boundary) + 0.5
    out[pos] = np.cos(0.5 * np.pi * _meyer_v(u))
    return out


def _pseudo_angle(fy: np.ndarray, fx: np.ndarray) -> np.ndarray:
    """Direction coordinate in [-1, 3), period 4, continuous across cones.

    Horizontal cone maps to slope fy/fx in [-1, 1]; vertical cone maps to
    2 - fx/fy in [1, 3]. Points and their negatives share a value.
    """
    ax, ay = np.abs(fx), np.abs(fy)
    theta = np.zeros(np.broadcast(fy, fx).shape)
    horiz = (ax >= ay) & (ax > 0)
    vert = (ay > ax)
    theta[horiz] = (fy / np.where(horiz, fx, 1.0))[horiz]
    theta[vert] = 2.0 - (fx / np.where(vert, fy, 1.0))[vert]
    return np.where(theta >= 3.0, theta - 4.0, theta)


def _angular_window(theta: np.ndarray, center: float, spacing: float) -> np.ndarray:
    """Squared angular window; windows spaced `spacing` apart sum to 1."""
    d = np.abs(theta - center)
    d = np.minimum(d, 4.0 - d)
    return np.where(d < spacing, np.cos(0.5 * np.pi * _meyer_v(d / spacing)) ** 2, 0.0)


@dataclass(frozen=True)
class PlaneIndex:
    """Position of one coefficient plane: scale, cone and shear offset."""

    scale: int
    cone: str
    shear: int

    def label(self) -> str:
        return f"{self.scale}:{self.cone}:{self.shear}"


@dataclass(frozen=True)
class SubbandSelector:
    """Addresses one plane as (scale, cone, shear offset)."""

    scale: int = 1
    cone: str = VERTICAL
    shear_offset: int = 0

    def __post_init__(self):
        cone = _CONES.get(str(self.cone).lower())
        if cone is None:
            raise InvalidSelectorError(f"unknown cone {self.cone!r}")
        object.__setattr__(self, "cone", cone)

    @classmethod
    def parse(cls, text: str) -> "SubbandSelector":
        """Parse the ``scale:cone:shear`` form, e.g. ``"1:v:0"``."""
        parts = text.strip().split(":")
        if len(parts) != 3:
            raise InvalidSelectorError(f"selector {text!r} is not scale:cone:shear")
        try:
            return cls(int(parts[0]), parts[1], int(parts[2]))
        except ValueError:
            raise InvalidSelectorError(f"selector {text!r} is not scale:cone:shear") from None

    def __str__(self) -> str:
        return f"{self.scale}:{self.cone}:{self.shear_offset}"


DEFAULT_SELECTOR = SubbandSelector(1, VERTICAL, 0)


def _shears(level: int, cone: str) -> range:
    half = 2 ** level
    if cone == HORIZONTAL:
        return range(-half + 1, half)
    return range(-half, half + 1)


class ShearletSystem:
    """Parseval shearlet filter bank for images of one fixed size.

    Instances are immutable after construction and may be shared between
    threads.

    Parameters
    ----------
    rows, cols : int
        Image size, both at least 32 and large enough for `n_scales`.
    n_scales : int
        Number of band-pass scales.
    shear_levels : sequence of int
        Shear level per scale; level ``k`` gives ``2**(k+2)`` directions.
    """

    def __init__(self, rows: int, cols: int, n_scales: int = 3,
                 shear_levels: Sequence[int] = (0, 1, 1)):
        shear_levels = tuple(int(k) for k in shear_levels)
        if n_scales < 1:
            raise InvalidConfigError("n_scales must be >= 1")
        if len(shear_levels) != n_scales:
            raise InvalidConfigError(
                f"need {n_scales} shear levels, got {len(shear_levels)}")
        if any(k < 0 or k > 6 for k in shear_levels):
            raise InvalidConfigError("shear levels must lie in 0..6")
        need = max(MIN_SIZE, 2 ** (n_scales + 2))
        if min(rows, cols) < need:
            raise InvalidConfigError(
                f"{rows}x{cols} is too small for {n_scales} scales (need >= {need})")
        self.rows, self.cols = int(rows), int(cols)
        self.n_scales = int(n_scales)
        self.shear_levels = shear_levels
        self.parseval = True

        fy = np.fft.fftfreq(self.rows)[:, None] * 2.0
        fx = np.fft.fftfreq(self.cols)[None, :] * 2.0
        radius = np.maximum(np.abs(fy), np.abs(fx))
        theta = _pseudo_angle(fy, fx)

        # cumulative squared lowpass responses; the finest one is all-pass
        cum = [_radial_lowpass(radius, 2.0 ** (j - self.n_scales)) ** 2
               for j in range(self.n_scales)]
        cum.append(np.ones_like(radius))

        index = [PlaneIndex(0, LOWPASS, 0)]
        weights = [cum[0]]
        for j, level in enumerate(shear_levels, start=1):
            band = np.clip(cum[j] - cum[j - 1], 0.0, None)
            spacing = 2.0 ** -level
            for cone in (HORIZONTAL, VERTICAL):
                for s in _shears(level, cone):
                    center = s * spacing if cone == HORIZONTAL else 2.0 - s * spacing
                    index.append(PlaneIndex(j, cone, s))
                    weights.append(band * _angular_window(theta, center, spacing))

        w = np.stack(weights)
        w /= w.sum(axis=0)
        # average with the mirrored grid so every response is even in frequency
        mirrored = np.roll(w[:, ::-1, ::-1], shift=(1, 1), axis=(1, 2))
        w = 0.5 * (w + mirrored)
        filters = np.sqrt(w)
        filters.setflags(write=False)
        self.filters = filters
        self.index = tuple(index)
        self._lookup = {(p.scale, p.cone, p.shear): i for i, p in enumerate(index)}

    @property
    def n_planes(self) -> int:
        return len(self.index)

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    def resolve(self, sel: SubbandSelector) -> int:
        """Return the plane number that `sel` addresses."""
        key = (sel.scale, sel.cone, sel.shear_offset)
        if sel.cone == LOWPASS:
            key = (0, LOWPASS, 0)
        try:
            return self._lookup[key]
        except KeyError:
            raise InvalidSelectorError(
                f"selector {sel} does not exist in a system with shear levels "
                f"{list(self.shear_levels)}") from None

    def frame_deviation(self) -> float:
        """Max over bins of |sum of squared responses - 1|."""
        return float(np.max(np.abs(np.sum(self.filters ** 2, axis=0) - 1.0)))

    def __repr__(self) -> str:
        return (f"ShearletSystem({self.rows}, {self.cols}, n_scales={self.n_scales}, "
                f"shear_levels={list(self.shear_levels)})")


def build_system(rows: int, cols: int, n_scales: int = 3,
                 shear_levels: Sequence[int] = (0, 1, 1)) -> ShearletSystem:
    return ShearletSystem(rows, cols, n_scales, shear_levels)


@dataclass(frozen=True, eq=False)
class ShearletCoeffs:
    """Coefficient planes of one decomposition, in system plane order."""

    planes: tuple
    system: ShearletSystem

    def __post_init__(self):
        if len(self.planes) != self.system.n_planes:
            raise InvalidInputError(
                f"expected {self.system.n_planes} planes, got {len(self.planes)}")
        for p in self.planes:
            if np.shape(p) != self.system.shape:
                raise InvalidInputError(
                    f"plane shape {np.shape(p)} does not match system {self.system.shape}")

    @property
    def index(self) -> tuple:
        return self.system.index

    def __len__(self) -> int:
        return len(self.planes)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.planes[i]


def _real_part(z: np.ndarray, scale: float) -> np.ndarray:
    resid = float(np.max(np.abs(z.imag))) if z.size else 0.0
    assert resid <= 1e-12 * max(scale, 1.0), f"imaginary residue {resid:g}"
    return np.ascontiguousarray(z.real)


def dst_forward(image, system: ShearletSystem) -> ShearletCoeffs:
    """Decompose `image` into ``system.n_planes`` full-size planes."""
    x = as_image(image)
    if x.shape != system.shape:
        raise InvalidInputError(f"image {x.shape} does not match system {system.shape}")
    spectrum = np.fft.fft2(x)
    scale = float(np.max(np.abs(x))) if x.size else 1.0
    planes = tuple(_real_part(np.fft.ifft2(f * spectrum), scale) for f in system.filters)
    return ShearletCoeffs(planes, system)


def dst_inverse(coeffs: ShearletCoeffs) -> np.ndarray:
    """Adjoint synthesis; exact inverse of :func:`dst_forward`."""
    system = coeffs.system
    if len(coeffs.planes) != system.n_planes:
        raise InvalidInputError("plane count does not match system")
    total = np.zeros(system.shape, dtype=np.complex128)
    scale = 1.0
    for f, p in zip(system.filters, coeffs.planes):
        total += f * np.fft.fft2(p)
        scale = max(scale, float(np.max(np.abs(p))))
    return _real_part(np.fft.ifft2(total), scale)


def select_subband(coeffs: ShearletCoeffs, sel: SubbandSelector = DEFAULT_SELECTOR) -> np.ndarray:
    """Return a copy of the plane addressed by `sel`."""
    return coeffs.planes[coeffs.system.resolve(sel)].copy()


def replace_subband(coeffs: ShearletCoeffs, sel: SubbandSelector, plane) -> ShearletCoeffs:
    """Return new coefficients with the plane at `sel` substituted."""
    i = coeffs.system.resolve(sel)
    plane = as_image(plane, "plane")
    if plane.shape != coeffs.system.shape:
        raise InvalidInputError(
            f"plane shape {plane.shape} does not match system {coeffs.system.shape}")
    planes = list(coeffs.planes)
    planes[i] = plane.copy()
    return ShearletCoeffs(tuple(planes), coeffs.system)
