"""Minimal baseline (sequential, Huffman) JPEG codec for 8-bit gray images.

Used by the JPEG attack so that compression is bit-reproducible and does
not depend on whichever libjpeg build Pillow links against. Quantization
uses the Annex K luminance table scaled by quality the way the IJG
library does; entropy coding uses the Annex K standard Huffman tables.
The decoder accepts any single-component baseline stream, including
restart intervals.
"""

import struct

import numpy as np
from scipy.fft import dctn, idctn

from .errors import InvalidInputError, InvalidSpecError

LUMA_QUANT = np.array([
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
]).reshape(8, 8)

DC_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
DC_VALS = tuple(range(12))
AC_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d)
AC_VALS = (
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
    0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5,
    0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
    0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8,
    0xf9, 0xfa,
)


def _zigzag() -> np.ndarray:
    order = sorted(((i, j) for i in range(8) for j in range(8)),
                   key=lambda p: (p[0] + p[1], p[0] if (p[0] + p[1]) % 2 else p[1]))
    return np.array([i * 8 + j for i, j in order])


ZIGZAG = _zigzag()


def quant_table(quality: int) -> np.ndarray:
    """Luminance table scaled to `quality` (1-100), IJG convention."""
    if not 1 <= int(quality) <= 100:
        raise InvalidSpecError(f"JPEG quality must be in 1..100, got {quality}")
    q = int(quality)
    scale = 5000 // q if q < 50 else 200 - 2 * q
    return np.clip((LUMA_QUANT * scale + 50) // 100, 1, 255)


def _code_table(bits, vals) -> dict:
    """Canonical Huffman codes: symbol -> (code, length)."""
    table, code, k = {}, 0, 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            table[vals[k]] = (code, length)
            code += 1
            k += 1
        code <<= 1
    return table


_DC_CODES = _code_table(DC_BITS, DC_VALS)
_AC_CODES = _code_table(AC_BITS, AC_VALS)


def _blocks(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    ph, pw = -h % 8, -w % 8
    x = np.pad(img.astype(np.float64), ((0, ph), (0, pw)), mode="edge") - 128.0
    bh, bw = x.shape[0] // 8, x.shape[1] // 8
    return x.reshape(bh, 8, bw, 8).transpose(0, 2, 1, 3)


def _unblocks(blocks: np.ndarray, shape: tuple) -> np.ndarray:
    bh, bw = blocks.shape[:2]
    x = blocks.transpose(0, 2, 1, 3).reshape(bh * 8, bw * 8)
    return x[:shape[0], :shape[1]]


def _magnitude(v: int):
    if v == 0:
        return 0, 0
    size = int(abs(v)).bit_length()
    return size, (v if v > 0 else v + (1 << size) - 1)


class _BitWriter:
    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.n = 0

    def write(self, code: int, length: int):
        self.acc = (self.acc << length) | code
        self.n += length
        while self.n >= 8:
            self.n -= 8
            byte = (self.acc >> self.n) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0)
        self.acc &= (1 << self.n) - 1

    def flush(self) -> bytes:
        if self.n:
            self.write((1 << (8 - self.n)) - 1, 8 - self.n)
        return bytes(self.out)


def _segment(marker: int, payload: bytes) -> bytes:
    return struct.pack(">HH", 0xFF00 | marker, len(payload) + 2) + payload


def encode(img, quality: int = 75) -> bytes:
    """Encode an 8-bit gray image as a baseline JFIF byte string."""
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise InvalidInputError("JPEG encoder needs a non-empty 2-D image")
    if img.dtype != np.uint8:
        if np.any((img < 0) | (img > 255)) or np.any(img != np.rint(img)):
            raise InvalidInputError("JPEG encoder needs 8-bit integer pixel values")
        img = img.astype(np.uint8)
    qt = quant_table(quality)
    coef = dctn(_blocks(img), axes=(2, 3), norm="ortho") / qt
    # round half away from zero like the IJG forward quantizer
    q = (np.sign(coef) * np.floor(np.abs(coef) + 0.5)).astype(np.int64)
    zz = q.reshape(q.shape[0], q.shape[1], 64)[:, :, ZIGZAG]

    bw = _BitWriter()
    pred = 0
    for block in zz.reshape(-1, 64).tolist():
        diff = block[0] - pred
        pred = block[0]
        size, bits = _magnitude(diff)
        bw.write(*_DC_CODES[size])
        if size:
            bw.write(bits, size)
        run = 0
        for v in block[1:]:
            if v == 0:
                run += 1
                continue
            while run > 15:
                bw.write(*_AC_CODES[0xF0])
                run -= 16
            size, bits = _magnitude(v)
            bw.write(*_AC_CODES[(run << 4) | size])
            bw.write(bits, size)
            run = 0
        if run:
            bw.write(*_AC_CODES[0x00])
    scan = bw.flush()

    h, w = img.shape
    out = [b"\xff\xd8",
           _segment(0xE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"),
           _segment(0xDB, b"\x00" + bytes(qt.reshape(64)[ZIGZAG].astype(np.uint8))),
           _segment(0xC0, struct.pack(">BHHB", 8, h, w, 1) + b"\x01\x11\x00"),
           _segment(0xC4, b"\x00" + bytes(DC_BITS) + bytes(DC_VALS)),
           _segment(0xC4, b"\x10" + bytes(AC_BITS) + bytes(AC_VALS)),
           _segment(0xDA, b"\x01\x01\x00\x00\x3f\x00"),
           scan,
           b"\xff\xd9"]
    return b"".join(out)


class _BitReader:
    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos
        self.acc = 0
        self.n = 0

    def bit(self) -> int:
        if self.n == 0:
            if self.pos >= len(self.data):
                raise InvalidInputError("JPEG scan data ended early")
            byte = self.data[self.pos]
            self.pos += 1
            if byte == 0xFF:
                nxt = self.data[self.pos] if self.pos < len(self.data) else 0
                if nxt == 0:
                    self.pos += 1
                else:
                    raise InvalidInputError(f"unexpected marker 0xFF{nxt:02X} in scan data")
            self.acc, self.n = byte, 8
        self.n -= 1
        return (self.acc >> self.n) & 1

    def bits(self, n: int) -> int:
        v = 0
        for _ in range(n):
            v = (v << 1) | self.bit()
        return v

    def decode(self, lookup: dict) -> int:
        code = length = 0
        while length < 16:
            code = (code << 1) | self.bit()
            length += 1
            sym = lookup.get((length, code))
            if sym is not None:
                return sym
        raise InvalidInputError("invalid Huffman code in JPEG scan")

    def restart(self):
        self.n = 0
        if (self.pos + 1 < len(self.data) and self.data[self.pos] == 0xFF
                and 0xD0 <= self.data[self.pos + 1] <= 0xD7):
            self.pos += 2
        else:
            raise InvalidInputError(f"expected restart marker at offset {self.pos}")


def _extend(v: int, size: int) -> int:
    return v - (1 << size) + 1 if size and v < (1 << (size - 1)) else v


def decode(data: bytes) -> np.ndarray:
    """Decode a single-component baseline JPEG into a uint8 array."""
    data = bytes(data)
    if data[:2] != b"\xff\xd8":
        raise InvalidInputError("not a JPEG stream (missing SOI)")
    pos = 2
    qts, huff, frame, restart = {}, {}, None, 0
    while True:
        if pos + 4 > len(data) or data[pos] != 0xFF:
            raise InvalidInputError(f"bad JPEG marker at offset {pos}")
        marker = data[pos + 1]
        if marker == 0xD9:
            raise InvalidInputError("JPEG has no scan")
        (length,) = struct.unpack(">H", data[pos + 2:pos + 4])
        seg = data[pos + 4:pos + 2 + length]
        pos += 2 + length
        if marker == 0xDB:
            i = 0
            while i < len(seg):
                if seg[i] >> 4:
                    raise InvalidInputError("16-bit quantization tables are not supported")
                table = np.zeros(64, dtype=np.int64)
                table[ZIGZAG] = np.frombuffer(seg[i + 1:i + 65], dtype=np.uint8)
                qts[seg[i] & 15] = table.reshape(8, 8)
                i += 65
        elif marker == 0xC4:
            i = 0
            while i < len(seg):
                tc_th = seg[i]
                counts = seg[i + 1:i + 17]
                total = sum(counts)
                vals = seg[i + 17:i + 17 + total]
                codes = _code_table(tuple(counts), tuple(vals))
                huff[tc_th] = {(ln, c): s for s, (c, ln) in codes.items()}
                i += 17 + total
        elif marker == 0xC0 or marker == 0xC1:
            precision, h, w, ncomp = struct.unpack(">BHHB", seg[:6])
            if precision != 8 or ncomp != 1:
                raise InvalidInputError("only 8-bit single-component JPEG is supported")
            if seg[7] != 0x11:
                raise InvalidInputError("unsupported sampling factors")
            frame = (h, w, seg[8])
        elif marker == 0xDD:
            (restart,) = struct.unpack(">H", seg[:2])
        elif marker == 0xDA:
            break
        elif 0xC2 <= marker <= 0xCF and marker not in (0xC4, 0xC8, 0xCC):
            raise InvalidInputError("only baseline sequential JPEG is supported")
    if frame is None:
        raise InvalidInputError("JPEG scan before frame header")
    h, w, tq = frame
    td_ta = seg[2]
    dc_tab, ac_tab = huff[td_ta >> 4], huff[0x10 | (td_ta & 15)]
    bh, bw = -(-h // 8), -(-w // 8)
    zz = np.zeros((bh * bw, 64), dtype=np.int64)
    rd = _BitReader(data, pos)
    pred = 0
    for b in range(bh * bw):
        if restart and b and b % restart == 0:
            rd.restart()
            pred = 0
        size = rd.decode(dc_tab)
        pred += _extend(rd.bits(size), size)
        zz[b, 0] = pred
        k = 1
        while k < 64:
            rs = rd.decode(ac_tab)
            run, size = rs >> 4, rs & 15
            if size == 0:
                if run != 15:
                    break
                k += 16
                continue
            k += run
            if k > 63:
                raise InvalidInputError("AC run past end of block")
            zz[b, k] = _extend(rd.bits(size), size)
            k += 1
    coef = np.zeros_like(zz)
    coef[:, ZIGZAG] = zz
    coef = coef.reshape(bh, bw, 8, 8) * qts[tq]
    pixels = idctn(coef.astype(np.float64), axes=(2, 3), norm="ortho") + 128.0
    return np.clip(np.rint(_unblocks(pixels, (h, w))), 0, 255).astype(np.uint8)


def roundtrip(img, quality: int) -> np.ndarray:
    """Compress and decompress, returning the degraded uint8 image."""
    return decode(encode(img, quality))
