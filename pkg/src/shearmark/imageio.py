"""Reading and writing gray-scale images.

PNG, PGM, TIFF and BMP go through Pillow as 8-bit gray. ``.npy`` files
hold float64 arrays and are the lossless route between embed and
extract.
"""

import errno
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InvalidInputError
from .image import as_image, quantize_u8

LOSSLESS_SUFFIX = ".npy"


def is_lossless_path(path) -> bool:
    return Path(path).suffix.lower() == LOSSLESS_SUFFIX


def read_image(path) -> np.ndarray:
    """Read a gray image as float64.

    Raises
    ------
    FileNotFoundError
        If `path` does not exist.
    InvalidInputError
        For color images, unreadable files or non-2-D arrays.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    if is_lossless_path(path):
        try:
            arr = np.load(path, allow_pickle=False)
        except ValueError as exc:
            raise InvalidInputError(f"{path}: {exc}") from None
        return as_image(arr, str(path))
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "1", "I;16", "I", "F"):
                arr = np.asarray(im)
            elif im.mode == "P" and _palette_is_gray(im):
                arr = np.asarray(im.convert("L"))
            else:
                raise InvalidInputError(
                    f"{path}: color images are not supported (mode {im.mode}); "
                    "convert to gray first")
    except UnidentifiedImageError:
        raise InvalidInputError(f"{path}: not a recognized image file") from None
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    if arr.dtype == np.uint16 or (arr.dtype.kind in "iu" and arr.max(initial=0) > 255):
        raise InvalidInputError(f"{path}: only 8-bit gray images are supported")
    return as_image(arr.astype(np.float64), str(path))


def _palette_is_gray(im) -> bool:
    pal = np.asarray(im.getpalette() or [], dtype=np.int64).reshape(-1, 3)
    return bool(len(pal)) and bool(np.all(pal[:, 0] == pal[:, 1]) and np.all(pal[:, 1] == pal[:, 2]))


def write_image(path, image) -> None:
    """Write `image` atomically.

    ``.npy`` keeps float64 values; any other suffix is quantized to 8 bits
    and saved by Pillow.
    """
    path = Path(path)
    arr = np.asarray(image)
    tmp = path.with_name(path.name + ".tmp")
    if is_lossless_path(path):
        with open(tmp, "wb") as fh:
            np.save(fh, np.asarray(arr, dtype=np.float64), allow_pickle=False)
    else:
        fmt = Image.registered_extensions().get(path.suffix.lower())
        if fmt is None:
            raise InvalidInputError(f"{path}: unknown image format {path.suffix!r}")
        u8 = arr if arr.dtype == np.uint8 else quantize_u8(arr)
        Image.fromarray(u8).save(tmp, format=fmt)
    os.replace(tmp, path)
