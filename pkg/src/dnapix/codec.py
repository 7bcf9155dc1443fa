"""Resolution-layered image codec.

Layer 0 carries the deepest low-pass band (the thumbnail); layer k >= 1
carries the three detail bands of decomposition level D-k+1. Every layer
serializes to a self-contained binary container ("PDL1") that parses
without any other layer present.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DimensionError, GapError, ParseError, StructureError
from .image import Image
from .rice import (
    BitReader,
    BitWriter,
    best_rice_k,
    rice_decode,
    rice_encode,
    unzigzag,
    zigzag,
)
from .wavelet import SubbandPyramid, dwt_forward, subband_shapes

MAGIC = b"PDL1"


@dataclass
class SubbandRecord:
    delta: int  # quantization step
    rice_k: int
    bit_length: int


@dataclass
class LayerContainer:
    layer_index: int
    decompositions: int
    channels: int
    width: int
    height: int
    subbands: list[SubbandRecord] = field(default_factory=list)
    payload: bytes = b""

    def serialize(self) -> bytes:
        out = bytearray(MAGIC)
        out += struct.pack(
            "<BBBII",
            self.layer_index,
            self.decompositions,
            self.channels,
            self.width,
            self.height,
        )
        for rec in self.subbands:
            # rice parameter occupies the low nibble of one byte
            out += struct.pack("<HBI", rec.delta, rec.rice_k & 0x0F, rec.bit_length)
        out += struct.pack("<I", len(self.payload))
        out += self.payload
        return bytes(out)

    @classmethod
    def parse(cls, data: bytes) -> "LayerContainer":
        if data[:4] != MAGIC:
            raise ParseError(f"bad container magic {data[:4]!r}")
        try:
            layer, d, channels, width, height = struct.unpack_from("<BBBII", data, 4)
            pos = 4 + 11
            n_subbands = channels * (1 if layer == 0 else 3)
            subbands = []
            for _ in range(n_subbands):
                delta, k, bits = struct.unpack_from("<HBI", data, pos)
                pos += 7
                subbands.append(SubbandRecord(delta, k & 0x0F, bits))
            (payload_len,) = struct.unpack_from("<I", data, pos)
            pos += 4
            payload = data[pos : pos + payload_len]
        except struct.error as exc:
            raise ParseError(f"truncated container header: {exc}") from exc
        if len(payload) != payload_len:
            raise ParseError("truncated container payload")
        if d < 1 or layer > d:
            raise ParseError(f"inconsistent layer index {layer} for D={d}")
        total_bits = sum(r.bit_length for r in subbands)
        if (total_bits + 7) // 8 != payload_len:
            raise ParseError("payload length disagrees with subband bit lengths")
        return cls(layer, d, channels, width, height, subbands, payload)


@dataclass
class LayeredStream:
    num_levels: int
    layers: list[LayerContainer]


def _quantize(band: np.ndarray, delta: int) -> np.ndarray:
    if delta == 1:
        return band.astype(np.int64)
    b = band.astype(np.int64)
    return np.sign(b) * (np.abs(b) // delta)


def _dequantize(q: np.ndarray, delta: int) -> np.ndarray:
    if delta == 1:
        return q.astype(np.int64)
    q = q.astype(np.int64)
    # midpoint reconstruction within the quantization bin
    mag = np.rint((np.abs(q) + 0.5) * delta).astype(np.int64)
    return np.where(q == 0, 0, np.sign(q) * mag)


def _layer_bands(pyramids: list[SubbandPyramid], layer: int):
    """Bands of one layer: (LL,) per channel for layer 0, else (HL, LH, HH)."""
    d = pyramids[0].decompositions
    if layer == 0:
        return [(p.ll,) for p in pyramids]
    level = d - layer + 1
    return [p.details[level - 1] for p in pyramids]


def encode_layers(img: Image, num_levels: int, q: int) -> LayeredStream:
    """Encode into ``num_levels`` independently parseable layer containers.

    The thumbnail band always uses step 1 so visual selection is clean;
    detail bands are quantized with step ``q``.
    """
    if num_levels < 2:
        raise ContractError("need at least 2 resolution levels")
    if q < 1:
        raise ContractError("quantization step must be >= 1")
    d = num_levels - 1
    pyramids = dwt_forward(img, d)
    layers = []
    for layer in range(num_levels):
        delta = 1 if layer == 0 else q
        records = []
        writer = BitWriter()
        for bands in _layer_bands(pyramids, layer):
            for band in bands:
                codes = zigzag(_quantize(band, delta).ravel())
                k = best_rice_k(codes)
                start = writer.bit_length
                rice_encode(codes, k, writer)
                records.append(SubbandRecord(delta, k, writer.bit_length - start))
        layers.append(
            LayerContainer(
                layer_index=layer,
                decompositions=d,
                channels=img.channels,
                width=img.width,
                height=img.height,
                subbands=records,
                payload=writer.getvalue(),
            )
        )
    return LayeredStream(num_levels=num_levels, layers=layers)


def _decode_container_bands(c: LayerContainer) -> list[list[np.ndarray]]:
    """Dequantized bands per channel, in the serialization order."""
    shapes = subband_shapes(c.width, c.height, c.decompositions)
    if c.layer_index == 0:
        per_channel_shapes = [shapes[c.decompositions - 1]["LL"]]
    else:
        level = c.decompositions - c.layer_index + 1
        s = shapes[level - 1]
        per_channel_shapes = [s["HL"], s["LH"], s["HH"]]
    expected = c.channels * len(per_channel_shapes)
    if len(c.subbands) != expected:
        raise StructureError(
            f"layer {c.layer_index}: {len(c.subbands)} subband records, expected {expected}"
        )
    out = []
    offset = 0
    idx = 0
    for _ in range(c.channels):
        bands = []
        for shape in per_channel_shapes:
            rec = c.subbands[idx]
            idx += 1
            count = shape[0] * shape[1]
            reader = BitReader(c.payload, bit_length=rec.bit_length, bit_offset=offset)
            codes = rice_decode(reader, rec.rice_k, count)
            offset += rec.bit_length
            bands.append(_dequantize(unzigzag(codes), rec.delta).reshape(shape))
        out.append(bands)
    return out


def decode_layers(layers: list[LayerContainer], target_level: int) -> Image:
    """Reconstruct at scale 1/2^(D - target_level) from layers 0..target_level."""
    by_index = {c.layer_index: c for c in layers}
    if 0 not in by_index:
        raise GapError(0, "incomplete stream: missing layer 0")
    base = by_index[0]
    d = base.decompositions
    if target_level > d:
        raise ContractError(f"target level {target_level} exceeds D={d}")
    for j in range(target_level + 1):
        if j not in by_index:
            raise GapError(j, f"incomplete stream: missing layer {j}")
        c = by_index[j]
        if (c.decompositions, c.channels, c.width, c.height) != (
            base.decompositions,
            base.channels,
            base.width,
            base.height,
        ):
            raise StructureError(f"layer {j} header disagrees with layer 0")

    from .wavelet import _inv2d  # local import to keep module surfaces tidy

    ll_planes = [bands[0] for bands in _decode_container_bands(base)]
    for k in range(1, target_level + 1):
        detail = _decode_container_bands(by_index[k])
        ll_planes = [
            _inv2d(ll, hl, lh, hh)
            for ll, (hl, lh, hh) in zip(ll_planes, detail)
        ]
    planes = [np.clip(p, 0, 255).astype(np.uint8) for p in ll_planes]
    return Image(np.stack(planes))


def thumbnail_dims(width: int, height: int, decompositions: int) -> tuple[int, int]:
    w, h = width, height
    for _ in range(decompositions):
        w, h = (w + 1) // 2, (h + 1) // 2
    return w, h
