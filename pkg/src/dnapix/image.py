"""8-bit raster images: PGM/PPM I/O, PSNR and bicubic resampling."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError


@dataclass(frozen=True)
class Image:
    """Channel-planar 8-bit image.

    ``planes`` has shape (channels, height, width), dtype uint8.
    """

    planes: np.ndarray

    def __post_init__(self):
        if self.planes.ndim != 3 or self.planes.shape[0] not in (1, 3):
            raise DimensionError(f"expected (1|3, h, w) planes, got {self.planes.shape}")
        if self.planes.dtype != np.uint8:
            raise DimensionError(f"expected uint8 samples, got {self.planes.dtype}")

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.planes.shape == other.planes.shape and bool(
            np.array_equal(self.planes, other.planes)
        )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Image":
        """Build from (h, w) grayscale or (h, w, 3) interleaved RGB."""
        a = np.asarray(arr, dtype=np.uint8)
        if a.ndim == 2:
            return cls(a[None, :, :].copy())
        if a.ndim == 3 and a.shape[2] == 3:
            return cls(np.ascontiguousarray(a.transpose(2, 0, 1)))
        raise DimensionError(f"unsupported array shape {a.shape}")

    def to_array(self) -> np.ndarray:
        """Return (h, w) for grayscale, (h, w, 3) for color."""
        if self.channels == 1:
            return self.planes[0].copy()
        return self.planes.transpose(1, 2, 0).copy()


def _read_pnm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ParseError("unexpected end of PNM header")
    return buf[start:pos], pos


def read_pnm(path) -> Image:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_pnm_token(buf, 0)
    if magic not in (b"P5", b"P6"):
        raise ParseError(f"unsupported PNM magic {magic!r}")
    w, pos = _read_pnm_token(buf, pos)
    h, pos = _read_pnm_token(buf, pos)
    maxval, pos = _read_pnm_token(buf, pos)
    if int(maxval) != 255:
        raise ParseError(f"only maxval 255 supported, got {int(maxval)}")
    pos += 1  # single whitespace after header
    w, h = int(w), int(h)
    channels = 1 if magic == b"P5" else 3
    need = w * h * channels
    data = np.frombuffer(buf, dtype=np.uint8, count=need, offset=pos)
    if data.size != need:
        raise ParseError("truncated PNM pixel data")
    if channels == 1:
        return Image(data.reshape(1, h, w).copy())
    return Image(np.ascontiguousarray(data.reshape(h, w, 3).transpose(2, 0, 1)))


def write_pnm(img: Image, path) -> None:
    magic = b"P5" if img.channels == 1 else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, img.width, img.height)
    if img.channels == 1:
        body = img.planes[0].tobytes()
    else:
        body = np.ascontiguousarray(img.planes.transpose(1, 2, 0)).tobytes()
    with open(path, "wb") as fh:
        fh.write(header + body)


def write_bmp(img: Image) -> bytes:
    """Serialize as an uncompressed 24-bit BMP (BGR samples, bottom-up rows)."""
    h, w = img.height, img.width
    if img.channels == 1:
        rgb = np.repeat(img.planes, 3, axis=0)
    else:
        rgb = img.planes
    bgr = np.ascontiguousarray(rgb[::-1].transpose(1, 2, 0))
    pad = (-(w * 3)) % 4
    body_size = (w * 3 + pad) * h
    header = struct.pack("<2sIHHI", b"BM", 54 + body_size, 0, 0, 54)
    info = struct.pack("<IiiHHIIiiII", 40, w, h, 1, 24, 0, body_size, 2835, 2835, 0, 0)
    out = bytearray(header + info)
    padding = b"\x00" * pad
    for y in range(h - 1, -1, -1):
        out += bgr[y].tobytes() + padding
    return bytes(out)


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    if a.planes.shape != b.planes.shape:
        raise DimensionError(f"shape mismatch {a.planes.shape} vs {b.planes.shape}")
    diff = a.planes.astype(np.int64) - b.planes.astype(np.int64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def _cubic_weights(t: float) -> np.ndarray:
    # Catmull-Rom (a = -0.5) kernel evaluated at offsets t+1, t, 1-t, 2-t
    a = -0.5

    def k(x):
        x = abs(x)
        if x <= 1:
            return (a + 2) * x**3 - (a + 3) * x**2 + 1
        if x < 2:
            return a * x**3 - 5 * a * x**2 + 8 * a * x - 4 * a
        return 0.0

    return np.array([k(t + 1), k(t), k(1 - t), k(2 - t)], dtype=np.float64)


def _resample_axis(plane: np.ndarray, target: int, axis: int) -> np.ndarray:
    src = plane.shape[axis]
    if src == target:
        return plane
    scale = src / target
    out_shape = list(plane.shape)
    out_shape[axis] = target
    out = np.zeros(out_shape, dtype=np.float64)
    moved = np.moveaxis(plane, axis, 0)
    out_moved = np.moveaxis(out, axis, 0)
    for i in range(target):
        center = (i + 0.5) * scale - 0.5
        base = math.floor(center)
        t = center - base
        w = _cubic_weights(t)
        acc = np.zeros(moved.shape[1:], dtype=np.float64)
        for j, wj in enumerate(w):
            idx = min(max(base - 1 + j, 0), src - 1)  # edge clamp
            acc += wj * moved[idx]
        out_moved[i] = acc
    return out


def upsample_bicubic(img: Image, target_w: int, target_h: int) -> Image:
    """Catmull-Rom bicubic upsampling, edge-clamped, clipped to [0, 255]."""
    if target_w < img.width or target_h < img.height:
        raise DimensionError("target dimensions must be >= source dimensions")
    planes = []
    for c in range(img.channels):
        p = img.planes[c].astype(np.float64)
        p = _resample_axis(p, target_h, axis=0)
        p = _resample_axis(p, target_w, axis=1)
        planes.append(np.clip(np.rint(p), 0, 255).astype(np.uint8))
    return Image(np.stack(planes))
