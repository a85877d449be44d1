"""The robustness attack catalog.

Every attack maps an 8-bit gray image to an 8-bit gray image of the same
size. Noise attacks are driven by an explicit seed. Geometric attacks
render onto the original canvas with zero fill, and :func:`register`
undoes them with the known parameters before extraction.

Conventions (the usual image-toolbox ones):

* GN, SN and SP parameters are on intensities scaled to [0, 1].
* SN is multiplicative ``x + x * n`` with ``n`` uniform, zero mean,
  variance ``v``.
* SP replaces a fraction ``d`` of pixels, half with 0 and half with 255.
* CR ``p`` keeps the centered fraction ``p`` of the image area.
* SC ``f`` shrinks by ``f`` and scales back to the original size.
* TR ``(dx, dy)`` moves content right by ``dx`` and down by ``dy`` pixels.
* SE ``(a, b)`` maps ``(x, y) -> (x + a*y, y + b*x)`` about the center.
* Filters use replicated borders.
"""

from dataclasses import dataclass, field
import enum
import hashlib
import math

import numpy as np
from scipy import ndimage

from . import jpeg
from .errors import CatalogParseError, InvalidInputError, InvalidSpecError


class Kind(str, enum.Enum):
    AF = "AF"
    GP = "GP"
    MF = "MF"
    GN = "GN"
    SN = "SN"
    SP = "SP"
    BL = "BL"
    GC = "GC"
    HE = "HE"
    MB = "MB"
    SH = "SH"
    JPEG = "JPEG"
    CR = "CR"
    RO = "RO"
    SC = "SC"
    TR = "TR"
    SE = "SE"
    FL = "FL"


NOISE_KINDS = frozenset({Kind.GN, Kind.SN, Kind.SP})
GEOMETRIC_KINDS = frozenset({Kind.RO, Kind.SC, Kind.TR, Kind.SE, Kind.FL})

# kind -> (min count, max count, defaults used to fill missing params)
_ARITY = {
    Kind.AF: (0, 1, (5,)),
    Kind.GP: (0, 2, (5, 0.5)),
    Kind.MF: (0, 1, (5,)),
    Kind.GN: (1, 2, None),
    Kind.SN: (1, 1, None),
    Kind.SP: (1, 1, None),
    Kind.BL: (1, 1, None),
    Kind.GC: (0, 1, (0.8,)),
    Kind.HE: (0, 0, ()),
    Kind.MB: (2, 2, None),
    Kind.SH: (1, 1, None),
    Kind.JPEG: (1, 1, None),
    Kind.CR: (1, 1, None),
    Kind.RO: (1, 1, None),
    Kind.SC: (1, 1, None),
    Kind.TR: (2, 2, None),
    Kind.SE: (2, 2, None),
    Kind.FL: (1, 1, None),
}


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if float(v) == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True)
class AttackSpec:
    """One attack with its parameters.

    ``params`` holds numbers, except FL which holds ``"h"`` or ``"v"``.
    ``seed`` is required for noise kinds. ``registered`` marks whether a
    geometric attack is undone before extraction.
    """

    kind: Kind
    params: tuple = ()
    seed: int | None = None
    registered: bool = True
    label: str = field(default="", compare=False)

    def __post_init__(self):
        try:
            kind = Kind(str(getattr(self.kind, "value", self.kind)).upper())
        except ValueError:
            raise InvalidSpecError(f"unknown attack kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", _normalize_params(kind, tuple(self.params)))
        if self.seed is not None:
            if not 0 <= int(self.seed) < 2 ** 64:
                raise InvalidSpecError("seed must be an unsigned 64-bit integer")
            object.__setattr__(self, "seed", int(self.seed))

    @property
    def is_noise(self) -> bool:
        return self.kind in NOISE_KINDS

    @property
    def is_geometric(self) -> bool:
        return self.kind in GEOMETRIC_KINDS

    def params_text(self) -> str:
        return ",".join(_fmt(p) for p in self.params)

    def __str__(self) -> str:
        text = self.kind.value
        if self.params:
            text += " " + self.params_text()
        if self.seed is not None:
            text += f" seed={self.seed}"
        return text

    def with_seed(self, seed: int) -> "AttackSpec":
        return AttackSpec(self.kind, self.params, seed, self.registered, self.label)

    def with_registered(self, registered: bool) -> "AttackSpec":
        return AttackSpec(self.kind, self.params, self.seed, registered, self.label)


def _normalize_params(kind: Kind, params: tuple) -> tuple:
    lo, hi, defaults = _ARITY[kind]
    if not lo <= len(params) <= hi:
        want = str(lo) if lo == hi else f"{lo}-{hi}"
        raise InvalidSpecError(f"{kind.value} takes {want} parameters, got {len(params)}")
    if kind == Kind.FL:
        axis = str(params[0]).lower()
        axis = {"horizontal": "h", "vertical": "v"}.get(axis, axis)
        if axis not in ("h", "v"):
            raise InvalidSpecError(f"FL axis must be h or v, got {params[0]!r}")
        return (axis,)
    try:
        vals = [float(p) for p in params]
    except (TypeError, ValueError):
        raise InvalidSpecError(f"{kind.value} parameters must be numbers: {params}") from None
    if not all(math.isfinite(v) for v in vals):
        raise InvalidSpecError(f"{kind.value} parameters must be finite")
    if defaults:
        vals += list(defaults[len(vals):])
    if kind == Kind.GN and len(vals) == 1:
        vals = [0.0, vals[0]]

    def need(cond, msg):
        if not cond:
            raise InvalidSpecError(f"{kind.value}: {msg}")

    if kind in (Kind.AF, Kind.MF, Kind.GP):
        need(vals[0] >= 1 and vals[0] == int(vals[0]), "window size must be a positive integer")
        vals[0] = int(vals[0])
    if kind == Kind.GP:
        need(vals[1] > 0, "sigma must be positive")
    elif kind == Kind.GN:
        need(vals[1] >= 0, "variance must be nonnegative")
    elif kind in (Kind.SN,):
        need(vals[0] >= 0, "variance must be nonnegative")
    elif kind == Kind.SP:
        need(0 <= vals[0] <= 1, "density must lie in [0, 1]")
    elif kind == Kind.BL:
        need(vals[0] > 0, "sigma must be positive")
    elif kind == Kind.GC:
        need(vals[0] > 0, "gamma must be positive")
    elif kind == Kind.MB:
        need(vals[0] >= 1, "length must be >= 1")
    elif kind == Kind.SH:
        need(vals[0] >= 0, "amount must be nonnegative")
    elif kind == Kind.JPEG:
        need(1 <= vals[0] <= 100 and vals[0] == int(vals[0]), "quality must be an integer in 1..100")
        vals[0] = int(vals[0])
    elif kind == Kind.CR:
        frac = vals[0] / 100.0 if vals[0] > 1 else vals[0]
        need(0 < frac <= 1, "crop fraction must lie in (0, 1] (or (0, 100] percent)")
        vals[0] = frac
    elif kind == Kind.SC:
        need(0 < vals[0] <= 1, "scale factor must lie in (0, 1]")
    elif kind == Kind.TR:
        need(all(v == int(v) for v in vals), "translation must be whole pixels")
        vals = [int(v) for v in vals]
    elif kind == Kind.SE:
        need(abs(1.0 - vals[0] * vals[1]) > 1e-6, "shear matrix is singular")
    return tuple(vals)


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and task identifiers."""
    text = ":".join([str(int(base_seed))] + [str(p) for p in parts])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def _as_u8(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 2 or min(arr.shape) < 2:
        raise InvalidInputError(f"attacks need a 2-D image, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
        raise InvalidInputError("attacks need 8-bit range images (0..255)")
    if np.any(arr != np.rint(arr)):
        raise InvalidInputError("attacks need integer-valued 8-bit images")
    return arr.astype(np.uint8)


def _to_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    t = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-0.5 * (t / sigma) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def motion_kernel(length: float, angle_deg: float) -> np.ndarray:
    """Normalized line kernel of `length` pixels at `angle_deg` (CCW from +x)."""
    half = (length - 1) / 2.0
    theta = math.radians(angle_deg)
    c, s = math.cos(theta), -math.sin(theta)  # image rows grow downward
    extent = int(math.ceil(max(abs(half * c), abs(half * s)))) + 1
    size = 2 * extent + 1
    k = np.zeros((size, size))
    n = max(int(math.ceil(length)) * 8, 2)
    for t in np.linspace(-half, half, n):
        x, y = extent + t * c, extent + t * s
        x0, y0 = int(math.floor(x)), int(math.floor(y))
        fx, fy = x - x0, y - y0
        k[y0, x0] += (1 - fx) * (1 - fy)
        k[y0, x0 + 1] += fx * (1 - fy)
        k[y0 + 1, x0] += (1 - fx) * fy
        k[y0 + 1, x0 + 1] += fx * fy
    return k / k.sum()


def _affine(img: np.ndarray, forward: np.ndarray) -> np.ndarray:
    """Render ``out(p) = img(forward^-1 (p - c) + c)`` with bilinear sampling.

    `forward` acts on (x, y) column vectors; the center c is the image
    center. Outside samples are zero.
    """
    h, w = img.shape
    inv = np.linalg.inv(forward)
    # ndimage works in (row, col) = (y, x) order
    m = inv[::-1, ::-1]
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    offset = center - m @ center
    out = ndimage.affine_transform(img.astype(np.float64), m, offset=offset,
                                   order=1, mode="constant", cval=0.0)
    return out


def _rotation(deg: float) -> np.ndarray:
    t = math.radians(deg)
    # counter-clockwise as displayed (y axis points down)
    return np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])


def _shift(img: np.ndarray, dx: int, dy: int) -> np.ndarray:
    out = np.zeros_like(img)
    h, w = img.shape
    src_y = slice(max(0, -dy), min(h, h - dy))
    dst_y = slice(max(0, dy), min(h, h + dy))
    src_x = slice(max(0, -dx), min(w, w - dx))
    dst_x = slice(max(0, dx), min(w, w + dx))
    if src_y.start < src_y.stop and src_x.start < src_x.stop:
        out[dst_y, dst_x] = img[src_y, src_x]
    return out


def _rng(spec: AttackSpec) -> np.random.Generator:
    if spec.seed is None:
        raise InvalidSpecError(f"{spec.kind.value} is a noise attack and needs a seed")
    return np.random.default_rng(spec.seed)


def _histeq(img: np.ndarray) -> np.ndarray:
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    nz = cdf[cdf > 0]
    cdf_min = nz[0]
    total = img.size
    if total == cdf_min:
        return img.copy()
    lut = np.rint((cdf - cdf_min) / (total - cdf_min) * 255.0)
    return np.clip(lut, 0, 255).astype(np.uint8)[img]


def apply_attack(image, spec: AttackSpec) -> np.ndarray:
    """Apply `spec` to an 8-bit image and return a uint8 image of equal size."""
    img = _as_u8(image)
    x = img.astype(np.float64)
    p = spec.params
    k = spec.kind
    if k == Kind.AF:
        return _to_u8(ndimage.uniform_filter(x, size=p[0], mode="nearest"))
    if k == Kind.GP:
        return _to_u8(ndimage.correlate(x, _gaussian_kernel(p[0], p[1]), mode="nearest"))
    if k == Kind.MF:
        return ndimage.median_filter(img, size=p[0], mode="nearest")
    if k == Kind.BL:
        return _to_u8(ndimage.gaussian_filter(x, sigma=p[0], mode="nearest"))
    if k == Kind.MB:
        return _to_u8(ndimage.correlate(x, motion_kernel(p[0], p[1]), mode="nearest"))
    if k == Kind.SH:
        blurred = ndimage.gaussian_filter(x, sigma=1.0, mode="nearest")
        return _to_u8(x + p[0] * (x - blurred))
    if k == Kind.GC:
        return _to_u8(255.0 * (x / 255.0) ** p[0])
    if k == Kind.HE:
        return _histeq(img)
    if k == Kind.JPEG:
        return jpeg.roundtrip(img, p[0])
    if k == Kind.GN:
        rng = _rng(spec)
        noisy = x / 255.0 + rng.normal(p[0], math.sqrt(p[1]), x.shape)
        return _to_u8(np.clip(noisy, 0, 1) * 255.0)
    if k == Kind.SN:
        rng = _rng(spec)
        n = rng.uniform(-0.5, 0.5, x.shape) * math.sqrt(12.0 * p[0])
        return _to_u8(np.clip(x / 255.0 * (1.0 + n), 0, 1) * 255.0)
    if k == Kind.SP:
        rng = _rng(spec)
        u = rng.random(x.shape)
        out = img.copy()
        out[u < p[0] / 2] = 0
        out[(u >= p[0] / 2) & (u < p[0])] = 255
        return out
    if k == Kind.CR:
        h, w = img.shape
        keep_h = min(h, max(1, int(round(h * math.sqrt(p[0])))))
        keep_w = min(w, max(1, int(round(w * math.sqrt(p[0])))))
        top, left = (h - keep_h) // 2, (w - keep_w) // 2
        out = np.zeros_like(img)
        out[top:top + keep_h, left:left + keep_w] = img[top:top + keep_h, left:left + keep_w]
        return out
    if k == Kind.RO:
        return _to_u8(_affine(img, _rotation(p[0])))
    if k == Kind.SC:
        h, w = img.shape
        small = (max(1, int(round(h * p[0]))), max(1, int(round(w * p[0]))))
        down = _resize(x, small)
        return _to_u8(_resize(down, (h, w)))
    if k == Kind.TR:
        return _shift(img, p[0], p[1])
    if k == Kind.SE:
        return _to_u8(_affine(img, np.array([[1.0, p[0]], [p[1], 1.0]])))
    if k == Kind.FL:
        return img[:, ::-1].copy() if p[0] == "h" else img[::-1, :].copy()
    raise InvalidSpecError(f"unhandled attack {k}")  # pragma: no cover


def _resize(x: np.ndarray, shape: tuple) -> np.ndarray:
    """Bilinear resize with pixel-center alignment."""
    h, w = x.shape
    rows = (np.arange(shape[0]) + 0.5) * h / shape[0] - 0.5
    cols = (np.arange(shape[1]) + 0.5) * w / shape[1] - 0.5
    rr, cc = np.meshgrid(np.clip(rows, 0, h - 1), np.clip(cols, 0, w - 1), indexing="ij")
    if shape[0] < h or shape[1] < w:
        # prefilter when shrinking so the result does not alias
        sigma = (max(h / shape[0] - 1, 0) / 2, max(w / shape[1] - 1, 0) / 2)
        x = ndimage.gaussian_filter(x, sigma=sigma, mode="nearest")
    return ndimage.map_coordinates(x, [rr, cc], order=1, mode="nearest")


def register(image, spec: AttackSpec) -> np.ndarray:
    """Undo a geometric attack with its known parameters.

    SC is already rendered back at full size, so registration is the
    identity for it. Lost regions stay zero.
    """
    if not spec.is_geometric:
        raise InvalidSpecError(f"{spec.kind.value} is not a geometric attack")
    img = _as_u8(image)
    p = spec.params
    if spec.kind == Kind.RO:
        return _to_u8(_affine(img, _rotation(-p[0])))
    if spec.kind == Kind.TR:
        return _shift(img, -p[0], -p[1])
    if spec.kind == Kind.SE:
        return _to_u8(_affine(img, np.linalg.inv(np.array([[1.0, p[0]], [p[1], 1.0]]))))
    if spec.kind == Kind.FL:
        return img[:, ::-1].copy() if p[0] == "h" else img[::-1, :].copy()
    return img.copy()


def attack_and_register(image, spec: AttackSpec) -> np.ndarray:
    """Apply `spec`, then undo it if it is geometric and marked registered."""
    out = apply_attack(image, spec)
    if spec.is_geometric and spec.registered:
        out = register(out, spec)
    return out


def parse_spec(text: str, lineno: int = 1) -> AttackSpec:
    """Parse one ``KIND param[,param...] [seed=N]`` line."""
    raw = text.strip()
    tokens = raw.replace("(", " ").replace(")", " ").split()
    if not tokens:
        raise CatalogParseError("empty attack specification", lineno)
    kind_text = tokens[0].upper()
    seed = None
    values = []
    try:
        for tok in tokens[1:]:
            low = tok.lower()
            if low.startswith("seed="):
                seed = int(low[5:])
                continue
            if low.startswith("q="):
                tok = tok[2:]
            tok = tok.rstrip("%°")
            for piece in tok.replace("×", "x").split(","):
                if not piece:
                    continue
                if kind_text in ("AF", "GP", "MF") and "x" in piece.lower() and not values:
                    a, b = piece.lower().split("x", 1)
                    if a != b:
                        raise InvalidSpecError(f"only square windows are supported: {piece}")
                    piece = a
                values.append(piece)
        if kind_text not in Kind.__members__:
            raise CatalogParseError(f"unknown attack kind {tokens[0]!r}", lineno)
        kind = Kind(kind_text)
        if kind != Kind.FL:
            values = [float(v) for v in values]
        spec = AttackSpec(kind, tuple(values), seed, label=raw)
    except CatalogParseError:
        raise
    except (ValueError, InvalidSpecError) as exc:
        raise CatalogParseError(f"{raw!r}: {exc}", lineno) from None
    return spec


def parse_catalog_text(text: str) -> list:
    specs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            specs.append(parse_spec(line, lineno))
    return specs


def parse_catalog(path) -> list:
    """Read an attack catalog file; blank lines and ``#`` comments are skipped."""
    with open(path, encoding="utf-8") as fh:
        return parse_catalog_text(fh.read())


def default_catalog() -> list:
    """The bundled catalog covering the full attack grid."""
    from importlib.resources import files
    return parse_catalog_text(files("shearmark").joinpath("data/default_catalog.txt")
                              .read_text(encoding="utf-8"))
