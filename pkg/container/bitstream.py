from __future__ import annotations

from typing import Union

import numpy as np

from utils.errors import CorruptStreamError, InvalidInputError


MAX_FIELD_BITS = 32


class BitSink:
    """
    Append-only MSB-first bit writer backed by a bytearray.
    Bits past the last whole byte wait in a small accumulator until
    align() / getvalue() pads them with zeros.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0  # pending bits in _acc (0..7)

    @property
    def bit_length(self) -> int:
        return 8 * len(self._buf) + self._nacc

    @property
    def is_aligned(self) -> bool:
        return self._nacc == 0

    def write_bits(self, value: int, n: int) -> None:
        if not 0 <= n <= MAX_FIELD_BITS:
            raise InvalidInputError(f"Bit count must be in [0, {MAX_FIELD_BITS}], got {n}.")
        if value < 0 or value >> n:
            raise InvalidInputError(f"Value {value} does not fit in {n} bits.")
        if n == 0:
            return

        acc = (self._acc << n) | value
        nacc = self._nacc + n
        while nacc >= 8:
            nacc -= 8
            self._buf.append((acc >> nacc) & 0xFF)
        self._acc = acc & ((1 << nacc) - 1)
        self._nacc = nacc

    def write_packed(self, data: bytes, nbits: int) -> None:
        """
        Append the first `nbits` bits of `data` (MSB-first packed bytes).
        """
        if nbits < 0 or nbits > 8 * len(data):
            raise InvalidInputError(f"Cannot take {nbits} bits from {len(data)} bytes.")
        whole, rem = divmod(nbits, 8)

        if whole:
            if self._nacc == 0:
                self._buf.extend(data[:whole])
            else:
                k = self._nacc
                arr = np.frombuffer(data, dtype=np.uint8, count=whole).astype(np.uint16)
                prev = np.empty_like(arr)
                prev[0] = self._acc
                prev[1:] = arr[:-1] & ((1 << k) - 1)
                out = ((prev << (8 - k)) | (arr >> k)) & 0xFF
                self._buf.extend(out.astype(np.uint8).tobytes())
                self._acc = int(arr[-1]) & ((1 << k) - 1)

        if rem:
            self.write_bits(data[whole] >> (8 - rem), rem)

    def align(self) -> int:
        """Zero-pad to a byte boundary; returns the number of pad bits."""
        pad = (8 - self._nacc) % 8
        if pad:
            self.write_bits(0, pad)
        return pad

    def getvalue(self) -> bytes:
        """Bytes written so far, with any partial byte zero-padded."""
        if self._nacc:
            return bytes(self._buf) + bytes([(self._acc << (8 - self._nacc)) & 0xFF])
        return bytes(self._buf)


class BitSource:
    """
    MSB-first bit reader over an in-memory buffer.
    """

    def __init__(self, data: Union[bytes, bytearray, memoryview], byte_offset: int = 0) -> None:
        self._data = bytes(data)
        self._pos = 8 * byte_offset
        self._end = 8 * len(self._data)

    @property
    def bit_position(self) -> int:
        return self._pos

    @property
    def byte_offset(self) -> int:
        return self._pos // 8

    @property
    def remaining_bits(self) -> int:
        return self._end - self._pos

    @property
    def is_aligned(self) -> bool:
        return self._pos % 8 == 0

    def _require(self, n: int) -> None:
        if self._pos + n > self._end:
            raise CorruptStreamError(
                f"Unexpected end of stream: needed {n} bits, {self._end - self._pos} left",
                offset=self.byte_offset,
            )

    def read_bits(self, n: int) -> int:
        if not 0 <= n <= MAX_FIELD_BITS:
            raise InvalidInputError(f"Bit count must be in [0, {MAX_FIELD_BITS}], got {n}.")
        self._require(n)
        if n == 0:
            return 0

        start = self._pos >> 3
        stop = (self._pos + n + 7) >> 3
        chunk = int.from_bytes(self._data[start:stop], "big")
        shift = 8 * (stop - start) - (self._pos - 8 * start) - n
        self._pos += n
        return (chunk >> shift) & ((1 << n) - 1)

    def read_packed(self, nbits: int) -> bytes:
        """
        Next `nbits` bits as MSB-first packed bytes, final byte zero-padded.
        """
        self._require(nbits)
        nbytes = (nbits + 7) // 8
        start = self._pos >> 3
        k = self._pos & 7

        if k == 0:
            out = bytearray(self._data[start : start + nbytes])
        else:
            arr = np.frombuffer(self._data, dtype=np.uint8)[start : start + nbytes + 1].astype(np.uint16)
            if arr.size < nbytes + 1:
                arr = np.concatenate((arr, np.zeros(nbytes + 1 - arr.size, dtype=np.uint16)))
            out = bytearray((((arr[:-1] << k) | (arr[1:] >> (8 - k))) & 0xFF).astype(np.uint8).tobytes())

        rem = nbits % 8
        if rem:
            out[-1] &= (0xFF << (8 - rem)) & 0xFF
        self._pos += nbits
        return bytes(out)

    def peek_bits(self, max_bits: int) -> np.ndarray:
        """
        Up to `max_bits` upcoming bits as a uint8 0/1 array (fewer near the end).
        """
        n = min(max_bits, self._end - self._pos)
        if n <= 0:
            return np.zeros(0, dtype=np.uint8)
        start = self._pos >> 3
        k = self._pos & 7
        stop = (self._pos + n + 7) >> 3
        bits = np.unpackbits(np.frombuffer(self._data, dtype=np.uint8)[start:stop])
        return bits[k : k + n]

    def skip(self, nbits: int) -> None:
        self._require(nbits)
        self._pos += nbits

    def align(self) -> None:
        """
        Advance to the next byte boundary; padding bits must be zero.
        """
        pad = (8 - (self._pos & 7)) & 7
        if pad and self.read_bits(pad) != 0:
            raise CorruptStreamError("Non-zero padding bits", offset=self.byte_offset - 1)


def write_bits(sink: BitSink, value: int, n: int) -> None:
    sink.write_bits(value, n)


def read_bits(source: BitSource, n: int) -> int:
    return source.read_bits(n)
