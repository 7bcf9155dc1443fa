"""Rice/Golomb-power-of-two coding of signed coefficients, MSB-first bits."""

from __future__ import annotations

import numpy as np

from .errors import ParseError

MAX_RICE_K = 15


class BitWriter:
    def __init__(self):
        self._bytes = bytearray()
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, nbits: int) -> None:
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self._nbits += nbits
        while self._nbits >= 8:
            self._nbits -= 8
            self._bytes.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def write_unary(self, q: int) -> None:
        # q ones followed by a zero
        while q >= 32:
            self.write(0xFFFFFFFF, 32)
            q -= 32
        self.write(((1 << q) - 1) << 1, q + 1)

    @property
    def bit_length(self) -> int:
        return len(self._bytes) * 8 + self._nbits

    def getvalue(self) -> bytes:
        out = bytearray(self._bytes)
        if self._nbits:
            out.append((self._acc << (8 - self._nbits)) & 0xFF)
        return bytes(out)


class BitReader:
    def __init__(self, data: bytes, bit_length: int | None = None, bit_offset: int = 0):
        self._data = data
        self._pos = bit_offset
        self._end = len(data) * 8 if bit_length is None else bit_offset + bit_length

    @property
    def position(self) -> int:
        return self._pos

    def read(self, nbits: int) -> int:
        if self._pos + nbits > self._end:
            raise ParseError("bitstream exhausted")
        value = 0
        pos = self._pos
        data = self._data
        remaining = nbits
        while remaining:
            byte_idx, bit_idx = divmod(pos, 8)
            avail = 8 - bit_idx
            take = avail if avail <= remaining else remaining
            chunk = (data[byte_idx] >> (avail - take)) & ((1 << take) - 1)
            value = (value << take) | chunk
            pos += take
            remaining -= take
        self._pos = pos
        return value

    def read_unary(self) -> int:
        q = 0
        data = self._data
        pos = self._pos
        end = self._end
        while True:
            if pos >= end:
                raise ParseError("unterminated unary run")
            byte_idx, bit_idx = divmod(pos, 8)
            bit = (data[byte_idx] >> (7 - bit_idx)) & 1
            pos += 1
            if bit == 0:
                break
            q += 1
        self._pos = pos
        return q


def zigzag(values: np.ndarray) -> np.ndarray:
    """Sign-interleave: v>=0 -> 2v, v<0 -> -2v-1."""
    v = values.astype(np.int64)
    return np.where(v >= 0, 2 * v, -2 * v - 1)


def unzigzag(codes: np.ndarray) -> np.ndarray:
    u = codes.astype(np.int64)
    return np.where(u % 2 == 0, u // 2, -(u + 1) // 2)


def best_rice_k(codes: np.ndarray) -> int:
    """Exhaustive scan of k in [0, 15] minimizing the encoded bit count."""
    if codes.size == 0:
        return 0
    best_k, best_bits = 0, None
    u = codes.astype(np.int64)
    for k in range(MAX_RICE_K + 1):
        bits = int(np.sum(u >> k)) + codes.size * (1 + k)
        if best_bits is None or bits < best_bits:
            best_k, best_bits = k, bits
    return best_k


def rice_encode(codes: np.ndarray, k: int, writer: BitWriter) -> None:
    write = writer.write
    write_unary = writer.write_unary
    if k == 0:
        for u in codes.tolist():
            write_unary(u)
    else:
        for u in codes.tolist():
            write_unary(u >> k)
            write(u, k)


def rice_decode(reader: BitReader, k: int, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.int64)
    read_unary = reader.read_unary
    read = reader.read
    if k == 0:
        for i in range(count):
            out[i] = read_unary()
    else:
        for i in range(count):
            q = read_unary()
            out[i] = (q << k) | read(k)
    return out
