"""Image container, PNM/BMP serialization, PSNR and resampling."""

import math
import struct

import numpy as np
import pytest

from dnapix.errors import DimensionError, ParseError
from dnapix.image import (
    Image,
    psnr,
    read_pnm,
    upsample_bicubic,
    write_bmp,
    write_pnm,
)


def test_plane_shape_validation():
    with pytest.raises(DimensionError):
        Image(np.zeros((2, 4, 4), dtype=np.uint8))
    with pytest.raises(DimensionError):
        Image(np.zeros((1, 4, 4), dtype=np.int32))


def test_from_array_round_trip():
    rng = np.random.default_rng(0)
    gray = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
    color = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
    assert np.array_equal(Image.from_array(gray).to_array(), gray)
    assert np.array_equal(Image.from_array(color).to_array(), color)


def test_equality_compares_pixels():
    a = Image(np.zeros((1, 2, 2), dtype=np.uint8))
    b = Image(np.zeros((1, 2, 2), dtype=np.uint8))
    c = Image(np.ones((1, 2, 2), dtype=np.uint8))
    assert a == b
    assert a != c
    assert a != "not an image"


@pytest.mark.parametrize("channels", [1, 3])
def test_pnm_round_trip(tmp_path, channels):
    rng = np.random.default_rng(1)
    img = Image(rng.integers(0, 256, size=(channels, 11, 13), dtype=np.uint8))
    path = tmp_path / ("x.pgm" if channels == 1 else "x.ppm")
    write_pnm(img, path)
    assert read_pnm(path) == img


def test_pnm_header_comments(tmp_path):
    body = bytes(range(6))
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n3 # inline\n2\n255\n" + body)
    img = read_pnm(path)
    assert (img.width, img.height) == (3, 2)
    assert img.planes[0].tobytes() == body


def test_pnm_rejects_other_maxval(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(ParseError):
        read_pnm(path)


def test_psnr_known_mse():
    a = Image(np.zeros((1, 4, 4), dtype=np.uint8))
    b = Image(np.full((1, 4, 4), 16, dtype=np.uint8))
    expected = 10.0 * math.log10(255.0**2 / 16.0**2)
    assert psnr(a, b) == pytest.approx(expected)
    assert math.isinf(psnr(a, a))
    with pytest.raises(DimensionError):
        psnr(a, Image(np.zeros((1, 2, 2), dtype=np.uint8)))


def test_upsample_same_size_is_identity():
    rng = np.random.default_rng(2)
    img = Image(rng.integers(0, 256, size=(1, 9, 6), dtype=np.uint8))
    assert upsample_bicubic(img, 6, 9) == img


def test_upsample_constant_stays_constant():
    img = Image(np.full((1, 4, 4), 137, dtype=np.uint8))
    up = upsample_bicubic(img, 16, 16)
    assert up.width == 16 and up.height == 16
    assert np.all(up.planes == 137)


def test_upsample_rejects_downscale():
    img = Image(np.zeros((1, 8, 8), dtype=np.uint8))
    with pytest.raises(DimensionError):
        upsample_bicubic(img, 4, 8)


def test_bmp_single_white_pixel():
    img = Image(np.full((1, 1, 1), 255, dtype=np.uint8))
    data = write_bmp(img)
    assert data[:2] == b"BM"
    assert len(data) == 54 + 4  # 3 BGR bytes + 1 pad
    assert struct.unpack_from("<I", data, 2)[0] == len(data)
    assert struct.unpack_from("<I", data, 10)[0] == 54  # pixel offset
    w, h = struct.unpack_from("<ii", data, 18)
    assert (w, h) == (1, 1)
    assert struct.unpack_from("<H", data, 28)[0] == 24  # bits per pixel
    assert data[54:58] == b"\xff\xff\xff\x00"


def test_bmp_rows_are_bottom_up_bgr():
    # 2x2: top row (R=1, G=2), bottom row (B=3, gray 9)
    arr = np.zeros((2, 2, 3), dtype=np.uint8)
    arr[0, 0] = (255, 0, 0)
    arr[0, 1] = (0, 255, 0)
    arr[1, 0] = (0, 0, 255)
    arr[1, 1] = (9, 9, 9)
    data = write_bmp(Image.from_array(arr))
    rows = data[54:]
    assert rows[0:6] == bytes([255, 0, 0, 9, 9, 9])  # bottom row first, BGR
    assert rows[8:14] == bytes([0, 0, 255, 0, 255, 0])  # 2-byte row padding
