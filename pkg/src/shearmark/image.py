"""Validation helpers for 2-D intensity arrays.

Images are plain ``numpy.ndarray`` objects of dtype float64. Integer inputs
are promoted on the way in; nothing here copies unless it has to.
"""

import numpy as np

from .errors import InvalidInputError


def as_image(x, name: str = "image", min_size: int = 2) -> np.ndarray:
    """Return `x` as a finite 2-D float64 array or raise InvalidInputError."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise InvalidInputError(
            f"{name} must be at least {min_size}x{min_size}, got {arr.shape}")
    arr = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def same_shape(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise InvalidInputError(f"shape mismatch: {x.shape} vs {y.shape}")


def quantize_u8(x: np.ndarray) -> np.ndarray:
    """Round half to even and clamp to [0, 255], returning uint8."""
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)
