"""Deterministic synthetic test images.

The standard 512x512 hosts are not redistributable, so CI runs on three
generated textures with different statistics, plus a generated logo as
the watermark. Every generator is seeded and resolution-independent in
layout, so ``host(name, 128)`` is a faithful miniature of
``host(name, 512)``.
"""

import numpy as np
from PIL import Image, ImageDraw

from .errors import InvalidInputError

HOST_NAMES = ("texture", "scene", "geometry")


def _normalize(x: np.ndarray, lo: float = 10.0, hi: float = 245.0) -> np.ndarray:
    x = x - x.min()
    x = x / max(x.max(), 1e-12)
    return lo + (hi - lo) * x


def _pink_noise(size: int, rng: np.random.Generator, exponent: float) -> np.ndarray:
    f = np.hypot(*np.meshgrid(np.fft.fftfreq(size), np.fft.fftfreq(size), indexing="ij"))
    f[0, 0] = 1.0
    spectrum = (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size)))
    return np.real(np.fft.ifft2(spectrum / f ** exponent))


def texture(size: int = 512, seed: int = 1) -> np.ndarray:
    """Fine-grained 1/f texture, baboon-like high activity."""
    rng = np.random.default_rng(seed)
    base = _pink_noise(size, rng, 0.9)
    y, x = np.mgrid[0:size, 0:size] / size
    stripes = 0.6 * np.sin(2 * np.pi * (18 * x + 7 * y)) * np.exp(-((x - 0.6) ** 2) * 6)
    return np.rint(_normalize(base / base.std() + stripes))


def scene(size: int = 512, seed: int = 2) -> np.ndarray:
    """Smooth shaded regions with soft edges, portrait-like statistics."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / size
    img = 0.5 + 0.3 * x - 0.2 * y
    for _ in range(9):
        cx, cy, rad = rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.08, 0.3)
        level = rng.uniform(-0.5, 0.5)
        d = np.hypot(x - cx, y - cy)
        img += level / (1 + np.exp((d - rad) * 60))
    smooth = _pink_noise(size, rng, 1.6)
    img += 0.15 * smooth / smooth.std()
    return np.rint(_normalize(img))


def geometry(size: int = 512, seed: int = 3) -> np.ndarray:
    """Hard-edged polygons and bars over a gradient, man-made scene."""
    rng = np.random.default_rng(seed)
    canvas = Image.new("L", (size, size), 0)
    draw = ImageDraw.Draw(canvas)
    for _ in range(14):
        pts = [tuple(rng.uniform(0, size, 2)) for _ in range(rng.integers(3, 6))]
        draw.polygon(pts, fill=int(rng.integers(30, 230)))
    for k in range(6):
        x0 = int(size * (0.05 + 0.15 * k))
        draw.rectangle([x0, int(size * 0.8), x0 + size // 24, size - 1], fill=40 + 30 * k)
    img = np.asarray(canvas, dtype=np.float64)
    y, x = np.mgrid[0:size, 0:size] / size
    img = 0.8 * img + 40 * (x + y) + rng.normal(0, 2.0, (size, size))
    return np.rint(np.clip(img, 0, 255))


_GENERATORS = {"texture": texture, "scene": scene, "geometry": geometry}


def host(name: str, size: int = 512) -> np.ndarray:
    """Synthetic host `name` (one of :data:`HOST_NAMES`) at ``size x size``."""
    try:
        generator = _GENERATORS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown synthetic host {name!r}; choose from {HOST_NAMES}") from None
    return generator(size)


def logo(size: int = 256) -> np.ndarray:
    """Gray-scale copyright-style logo: ring, letter C, shaded banner."""
    s = 4 * size
    canvas = Image.new("L", (s, s), 235)
    draw = ImageDraw.Draw(canvas)
    m = s // 16
    draw.ellipse([m, m, s - m, s - m], fill=40)
    draw.ellipse([2 * m, 2 * m, s - 2 * m, s - 2 * m], fill=235)
    draw.pieslice([4 * m, 4 * m, s - 4 * m, s - 4 * m], 40, 320, fill=40)
    draw.ellipse([6 * m, 6 * m, s - 6 * m, s - 6 * m], fill=235)
    draw.rectangle([s // 2, 6 * m, s - 4 * m, s - 6 * m], fill=235)
    draw.rectangle([0, s - 2 * m, s, s], fill=140)
    img = canvas.resize((size, size), Image.Resampling.BOX)
    out = np.asarray(img, dtype=np.float64)
    y, x = np.mgrid[0:size, 0:size] / size
    return np.rint(np.clip(out - 30 * x * (out > 200), 0, 255))
