"""Layer container format and codec round trips."""

import math
import struct

import numpy as np
import pytest

from dnapix.codec import (
    LayerContainer,
    SubbandRecord,
    _dequantize,
    _quantize,
    decode_layers,
    encode_layers,
    thumbnail_dims,
)
from dnapix.errors import ContractError, GapError, ParseError, StructureError
from dnapix.image import Image, psnr, upsample_bicubic


def random_image(seed, channels=1, height=40, width=24):
    rng = np.random.default_rng(seed)
    return Image(rng.integers(0, 256, size=(channels, height, width), dtype=np.uint8))


def test_layer_count_and_subband_records():
    stream = encode_layers(random_image(0), num_levels=4, q=1)
    assert len(stream.layers) == 4
    assert len(stream.layers[0].subbands) == 1  # one LL band per channel
    for c in stream.layers[1:]:
        assert len(c.subbands) == 3


def test_color_has_three_records_per_band():
    stream = encode_layers(random_image(1, channels=3), num_levels=3, q=1)
    assert len(stream.layers[0].subbands) == 3
    assert len(stream.layers[1].subbands) == 9


@pytest.mark.parametrize(
    "channels,height,width,levels",
    [(1, 40, 24, 3), (1, 37, 29, 3), (3, 33, 48, 4), (1, 96, 96, 5)],
)
def test_lossless_round_trip(channels, height, width, levels):
    img = random_image(2, channels, height, width)
    stream = encode_layers(img, num_levels=levels, q=1)
    assert decode_layers(stream.layers, levels - 1) == img


def test_container_wire_layout():
    c = LayerContainer(
        layer_index=0,
        decompositions=2,
        channels=1,
        width=3,
        height=5,
        subbands=[SubbandRecord(delta=1, rice_k=7, bit_length=16)],
        payload=b"\xab\xcd",
    )
    data = c.serialize()
    assert data[:4] == b"PDL1"
    assert data[4:7] == bytes([0, 2, 1])  # layer, D, channels
    assert struct.unpack_from("<II", data, 7) == (3, 5)
    assert struct.unpack_from("<HBI", data, 15) == (1, 7, 16)
    assert struct.unpack_from("<I", data, 22) == (2,)
    assert data[26:] == b"\xab\xcd"
    assert LayerContainer.parse(data) == c


def test_every_layer_parses_alone():
    img = random_image(3)
    for c in encode_layers(img, num_levels=4, q=2).layers:
        parsed = LayerContainer.parse(c.serialize())
        assert parsed == c


def test_parse_rejects_bad_magic_and_truncation():
    data = encode_layers(random_image(4), 3, 1).layers[0].serialize()
    with pytest.raises(ParseError):
        LayerContainer.parse(b"XXXX" + data[4:])
    with pytest.raises(ParseError):
        LayerContainer.parse(data[:10])
    with pytest.raises(ParseError):
        LayerContainer.parse(data[:-1])


def test_parse_checks_payload_against_bit_lengths():
    c = encode_layers(random_image(5), 3, 1).layers[1]
    bad = LayerContainer(
        c.layer_index, c.decompositions, c.channels, c.width, c.height,
        [SubbandRecord(r.delta, r.rice_k, r.bit_length + 8) for r in c.subbands],
        c.payload,
    )
    with pytest.raises(ParseError):
        LayerContainer.parse(bad.serialize())


def test_decode_needs_contiguous_layers():
    stream = encode_layers(random_image(6), 4, 1)
    with pytest.raises(GapError) as err:
        decode_layers([stream.layers[0], stream.layers[2]], 2)
    assert err.value.index == 1
    with pytest.raises(GapError):
        decode_layers(stream.layers[1:], 1)


def test_decode_rejects_header_disagreement():
    a = encode_layers(random_image(7), 3, 1).layers
    b = encode_layers(random_image(8, height=48, width=48), 3, 1).layers
    with pytest.raises(StructureError):
        decode_layers([a[0], b[1]], 1)


def test_decode_level_bounds():
    stream = encode_layers(random_image(9), 3, 1)
    with pytest.raises(ContractError):
        decode_layers(stream.layers, 3)


def test_quantizer_midpoint_reconstruction():
    band = np.array([0, 1, 3, -5, 8, -1])
    assert _quantize(band, 1).tolist() == band.tolist()
    q2 = _quantize(band, 2)
    assert q2.tolist() == [0, 0, 1, -2, 4, 0]
    # nonzero bins reconstruct at their midpoint: (|q| + 0.5) * delta
    assert _dequantize(q2, 2).tolist() == [0, 0, 3, -5, 9, 0]


def test_lossy_quality_degrades_gracefully():
    img = random_image(10, height=64, width=64)
    exact = decode_layers(encode_layers(img, 4, 1).layers, 3)
    coarse = decode_layers(encode_layers(img, 4, 8).layers, 3)
    assert exact == img
    assert 20.0 < psnr(coarse, img) < 60.0


def test_progressive_levels_shrink_dyadically():
    img = random_image(11, height=96, width=64)
    stream = encode_layers(img, 5, 1)
    for level in range(5):
        out = decode_layers(stream.layers[: level + 1], level)
        assert (out.width, out.height) == thumbnail_dims(64, 96, 4 - level)


def test_thumbnail_dims_uses_ceil():
    assert thumbnail_dims(96, 64, 4) == (6, 4)
    assert thumbnail_dims(17, 9, 2) == (5, 3)
    assert thumbnail_dims(10, 10, 0) == (10, 10)


def test_monotone_psnr_on_smooth_content():
    # bandlimited content: every extra detail layer should help
    y, x = np.mgrid[0:96, 0:96] / 96.0
    base = (
        120
        + 60 * np.sin(2 * np.pi * 1.3 * x)
        + 50 * np.cos(2 * np.pi * 0.9 * y)
        + 20 * np.sin(2 * np.pi * 2.1 * (x + y))
    )
    img = Image(np.clip(base, 0, 255).astype(np.uint8)[None])
    stream = encode_layers(img, 5, 1)
    last = -1.0
    for level in range(5):
        out = decode_layers(stream.layers[: level + 1], level)
        value = psnr(upsample_bicubic(out, img.width, img.height), img)
        assert value >= last
        last = value
    assert math.isinf(last)
