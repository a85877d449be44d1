"""Transparency and robustness metrics: MSE, PSNR, SSIM and NC."""

from dataclasses import dataclass
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError
from .image import as_image, same_shape

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(x, y, min_size=1):
    x = as_image(x, "x", min_size=min_size)
    y = as_image(y, "y", min_size=min_size)
    same_shape(x, y)
    return x, y


def mse(x, y) -> float:
    """Mean squared difference of two equally sized images."""
    x, y = _pair(x, y)
    return float(np.mean((x - y) ** 2))


def psnr(x, y, peak: float | None = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images.

    With ``peak=None`` the peak is ``max(x)``, the literal per-image form.
    """
    x, y = _pair(x, y)
    if peak is None:
        peak = float(np.max(x))
    if peak <= 0:
        raise InvalidInputError("peak must be positive")
    err = float(np.mean((x - y) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian taps centered on the middle sample."""
    t = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-0.5 * (t / sigma) ** 2)
    return g / g.sum()


def _filter_valid(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    rows = sliding_window_view(x, g.size, axis=1) @ g
    return sliding_window_view(rows, g.size, axis=0) @ g


def ssim_map(x, y, data_range: float = 255.0) -> np.ndarray:
    """Local SSIM at every position where the window fits entirely."""
    x, y = _pair(x, y)
    if min(x.shape) < SSIM_WINDOW:
        raise InvalidInputError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got {x.shape}")
    g = gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return num / den


def ssim(x, y, data_range: float = 255.0) -> float:
    """Mean SSIM over 11x11 Gaussian windows (sigma 1.5, K1=0.01, K2=0.03)."""
    x, y = _pair(x, y)
    if np.array_equal(x, y):
        return 1.0
    return float(np.clip(np.mean(ssim_map(x, y, data_range)), -1.0, 1.0))


def nc(w, w_ext) -> float:
    """Zero-mean normalized cross-correlation (Pearson) of two images.

    Returns 0.0 when either input is constant; see :func:`nc_degenerate`.
    """
    w, w_ext = _pair(w, w_ext)
    a = w - w.mean()
    b = w_ext - w_ext.mean()
    den = math.sqrt(float(np.sum(a * a))) * math.sqrt(float(np.sum(b * b)))
    if den == 0.0:
        return 0.0
    return float(np.clip(np.sum(a * b) / den, -1.0, 1.0))


def nc_degenerate(w, w_ext) -> bool:
    """True when NC is undefined because an input has zero variance."""
    w, w_ext = _pair(w, w_ext)
    return bool(np.ptp(w) == 0 or np.ptp(w_ext) == 0)


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    mse: float
    ssim: float
    nc: float
    nc_degenerate: bool = False


def compare(x, y, peak: float | None = 255.0) -> MetricReport:
    """All four metrics for one image pair."""
    x, y = _pair(x, y)
    return MetricReport(
        psnr=psnr(x, y, peak), mse=mse(x, y), ssim=ssim(x, y),
        nc=nc(x, y), nc_degenerate=nc_degenerate(x, y))
