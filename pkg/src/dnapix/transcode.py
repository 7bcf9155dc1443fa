"""Bit-exact conversion between layer byte streams and constrained
nucleotide data blocks.

A block is 36 bytes (u32 index, u16 CRC, 30 payload bytes) mapped through
base-3 digits onto a rotating quaternary code: each trit picks among the
three nucleotides different from the previously emitted one, so the block
body can never contain a homopolymer run.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import (
    CorruptionError,
    GapError,
    IntegrityError,
    PaddingContractError,
    ParseError,
)

PAYLOAD_BYTES = 30
HEADER_BYTES = 6
BLOCK_BYTES = HEADER_BYTES + PAYLOAD_BYTES  # 36 bytes -> 12 trit groups
TRITS_PER_GROUP = 16
BLOCK_NT = (BLOCK_BYTES // 3) * TRITS_PER_GROUP  # 192 nucleotides

NUCLEOTIDES = "ACGT"
# ROTATION[prev] lists, lexicographically, the three emissions allowed after prev
ROTATION = {p: "".join(c for c in NUCLEOTIDES if c != p) for p in NUCLEOTIDES}


def _crc16_table():
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
        table.append(crc)
    return table


_CRC_TABLE = _crc16_table()


def crc16_ccitt(data: bytes, crc: int = 0xFFFF) -> int:
    """CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection)."""
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


@dataclass(frozen=True)
class DataBlock:
    index: int
    crc: int
    payload: bytes

    @classmethod
    def create(cls, index: int, payload: bytes) -> "DataBlock":
        if len(payload) != PAYLOAD_BYTES:
            raise PaddingContractError(
                f"payload must be {PAYLOAD_BYTES} bytes, got {len(payload)}"
            )
        crc = crc16_ccitt(struct.pack(">I", index) + payload)
        return cls(index, crc, payload)

    def serialize(self) -> bytes:
        return struct.pack(">IH", self.index, self.crc) + self.payload

    @classmethod
    def parse(cls, data: bytes, verify: bool = True) -> "DataBlock":
        if len(data) != BLOCK_BYTES:
            raise ParseError(f"block must be {BLOCK_BYTES} bytes, got {len(data)}")
        index, crc = struct.unpack_from(">IH", data)
        payload = data[HEADER_BYTES:]
        if verify and crc != crc16_ccitt(data[:4] + payload):
            raise IntegrityError(f"CRC mismatch on block index {index}")
        return cls(index, crc, payload)

    @property
    def crc_ok(self) -> bool:
        return self.crc == crc16_ccitt(struct.pack(">I", self.index) + self.payload)


def bytes_to_trits(data: bytes) -> list[int]:
    """Map each big-endian 3-byte group to 16 base-3 digits, MSD first."""
    if len(data) % 3 != 0:
        raise PaddingContractError(f"length {len(data)} is not a multiple of 3")
    trits = []
    for i in range(0, len(data), 3):
        value = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2]
        group = [0] * TRITS_PER_GROUP
        for j in range(TRITS_PER_GROUP - 1, -1, -1):
            value, group[j] = divmod(value, 3)
        trits.extend(group)
    return trits


def trits_to_bytes(trits) -> bytes:
    if len(trits) % TRITS_PER_GROUP != 0:
        raise PaddingContractError(
            f"trit count {len(trits)} is not a multiple of {TRITS_PER_GROUP}"
        )
    out = bytearray()
    for i in range(0, len(trits), TRITS_PER_GROUP):
        value = 0
        for t in trits[i : i + TRITS_PER_GROUP]:
            value = value * 3 + t
        if value >= 1 << 24:
            raise CorruptionError(
                f"trit group value {value} exceeds 24 bits (undetected channel error)"
            )
        out += value.to_bytes(3, "big")
    return bytes(out)


def trits_to_nucleotides(trits, prev: str) -> str:
    out = []
    for t in trits:
        prev = ROTATION[prev][t]
        out.append(prev)
    return "".join(out)


def nucleotides_to_trits(nts: str, prev: str) -> list[int]:
    trits = []
    for c in nts:
        options = ROTATION.get(prev)
        if options is None:
            raise CorruptionError(f"invalid nucleotide {prev!r}")
        t = options.find(c)
        if t < 0:
            raise CorruptionError(
                f"nucleotide {c!r} repeats its predecessor (uncorrected channel error)"
            )
        trits.append(t)
        prev = c
    return trits


def block_to_nucleotides(block: DataBlock, prev: str) -> str:
    return trits_to_nucleotides(bytes_to_trits(block.serialize()), prev)


def nucleotides_to_block(nts: str, prev: str, verify: bool = True) -> DataBlock:
    if len(nts) != BLOCK_NT:
        raise ParseError(f"block body must be {BLOCK_NT} nt, got {len(nts)}")
    data = trits_to_bytes(nucleotides_to_trits(nts, prev))
    return DataBlock.parse(data, verify=verify)


def blocks_from_stream(layer_bytes: bytes) -> list[DataBlock]:
    """Split into 30-byte payloads (zero-padded tail), indexed consecutively."""
    blocks = []
    for index in range(0, (len(layer_bytes) + PAYLOAD_BYTES - 1) // PAYLOAD_BYTES):
        chunk = layer_bytes[index * PAYLOAD_BYTES : (index + 1) * PAYLOAD_BYTES]
        blocks.append(DataBlock.create(index, chunk.ljust(PAYLOAD_BYTES, b"\x00")))
    return blocks


def stream_from_blocks(blocks) -> bytes:
    """Reassemble payload bytes; blocks may arrive in any order."""
    by_index = {}
    for b in blocks:
        if not b.crc_ok:
            raise IntegrityError(f"CRC mismatch on block index {b.index}")
        by_index[b.index] = b
    out = bytearray()
    for i in range(len(by_index)):
        if i not in by_index:
            raise GapError(i)
        out += by_index[i].payload
    return bytes(out)
