"""Binary serialization of :class:`~shearmark.watermark.WatermarkKey`.

Layout (little-endian)::

    magic        4s   b"SMK1"
    version      u16
    alpha        f64
    scheme       u8
    wavelet      u8 length + ASCII bytes
    n_scales     u8
    shear_levels n_scales x u8
    selector     u8 scale, u8 cone (0 low, 1 h, 2 v), i8 shear
    dims         4 x u32   wm_rows, wm_cols, host_rows, host_cols
    s            r x f64
    u_w          r*r x f64, row-major
    v_w          r*r x f64, row-major
    crc32        u32 of every preceding byte

The core size ``r`` is not stored; it is recovered from the payload length
``8 * (r + 2 r^2)``.
"""

import math
import os
import struct
import zlib

import numpy as np

from .errors import KeyFormatError
from .shearlet import HORIZONTAL, LOWPASS, VERTICAL, SubbandSelector
from .watermark import EmbedConfig, Scheme, WatermarkKey

MAGIC = b"SMK1"
VERSION = 1
_CONE_CODES = {LOWPASS: 0, HORIZONTAL: 1, VERTICAL: 2}
_CODE_CONES = {v: k for k, v in _CONE_CODES.items()}


def encode_key(key: WatermarkKey) -> bytes:
    cfg = key.config
    name = cfg.wavelet.encode("ascii")
    parts = [
        MAGIC,
        struct.pack("<H", VERSION),
        struct.pack("<dB", cfg.alpha, int(cfg.scheme)),
        struct.pack("<B", len(name)), name,
        struct.pack("<B", cfg.n_scales),
        bytes(cfg.shear_levels),
        struct.pack("<BBb", cfg.selector.scale, _CONE_CODES[cfg.selector.cone],
                    cfg.selector.shear_offset),
        struct.pack("<4I", key.wm_rows, key.wm_cols, key.host_rows, key.host_cols),
    ]
    for arr in (key.s, key.u_w, key.v_w):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise KeyFormatError(
                f"truncated key: need {size} bytes for {what} at offset {self.pos}, "
                f"{len(self.data) - self.pos} left")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def raw(self, size: int, what: str) -> bytes:
        if self.pos + size > len(self.data):
            raise KeyFormatError(
                f"truncated key: need {size} bytes for {what} at offset {self.pos}")
        out = self.data[self.pos:self.pos + size]
        self.pos += size
        return out


def decode_key(data: bytes) -> WatermarkKey:
    data = bytes(data)
    if len(data) < 4 or data[:4] != MAGIC:
        raise KeyFormatError(f"bad magic at offset 0: {data[:4]!r} (expected {MAGIC!r})")
    if len(data) < 8:
        raise KeyFormatError(f"truncated key: {len(data)} bytes")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise KeyFormatError(f"CRC mismatch at offset {len(body)}: file is corrupt")
    rd = _Reader(body)
    rd.pos = 4
    (version,) = rd.take("<H", "version")
    if version != VERSION:
        raise KeyFormatError(f"unsupported key version {version} at offset 4")
    alpha, scheme = rd.take("<dB", "alpha/scheme")
    (name_len,) = rd.take("<B", "wavelet name length")
    try:
        wavelet = rd.raw(name_len, "wavelet name").decode("ascii")
    except UnicodeDecodeError:
        raise KeyFormatError(f"wavelet name at offset {rd.pos - name_len} is not ASCII") from None
    (n_scales,) = rd.take("<B", "n_scales")
    levels = tuple(rd.raw(n_scales, "shear levels"))
    sel_scale, cone_code, sel_shear = rd.take("<BBb", "selector")
    wm_rows, wm_cols, host_rows, host_cols = rd.take("<4I", "dimensions")

    payload = len(body) - rd.pos
    if payload % 8:
        raise KeyFormatError(f"array payload at offset {rd.pos} is not a multiple of 8 bytes")
    n = payload // 8
    r = (math.isqrt(1 + 8 * n) - 1) // 4
    if r + 2 * r * r != n or r < 1:
        raise KeyFormatError(
            f"array payload of {payload} bytes at offset {rd.pos} does not fit r + 2r^2 doubles")
    arrays = np.frombuffer(body, dtype="<f8", offset=rd.pos).astype(np.float64)
    s = arrays[:r].copy()
    u_w = arrays[r:r + r * r].reshape(r, r).copy()
    v_w = arrays[r + r * r:].reshape(r, r).copy()

    if cone_code not in _CODE_CONES:
        raise KeyFormatError(f"unknown cone code {cone_code}")
    try:
        config = EmbedConfig(
            alpha=alpha, scheme=Scheme(scheme), wavelet=wavelet, n_scales=n_scales,
            shear_levels=levels,
            selector=SubbandSelector(sel_scale, _CODE_CONES[cone_code], sel_shear))
    except ValueError as exc:
        raise KeyFormatError(f"invalid config block: {exc}") from None
    if wm_rows != wm_cols or wm_rows > r:
        raise KeyFormatError(f"watermark {wm_rows}x{wm_cols} inconsistent with core size {r}")
    return WatermarkKey(config=config, s=s, u_w=u_w, v_w=v_w,
                        wm_rows=wm_rows, wm_cols=wm_cols,
                        host_rows=host_rows, host_cols=host_cols, format_version=version)


def write_key(key: WatermarkKey, path) -> None:
    """Write `key` to `path` atomically."""
    data = encode_key(key)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def read_key(path) -> WatermarkKey:
    with open(path, "rb") as fh:
        return decode_key(fh.read())
