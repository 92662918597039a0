from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Sequence, Tuple

import numpy as np

from container.layout import (
    MAX_BLOCK_SIZE,
    MODE_HUFFMAN,
    MODE_RAW,
    SAMPLE_BITS,
    huffman_record_bits,
    raw_record_bits,
)
from huffman.code_builder import (
    ALPHABET_SIZE,
    MAX_CODE_LENGTH,
    CanonicalCodebook,
    CodeLengthTable,
    FrequencyTable,
    as_symbols,
    assign_canonical_codes,
    build_code_lengths,
    compute_frequencies,
    kraft_is_valid,
)
from utils.errors import CorruptStreamError, InternalConsistencyError, InvalidInputError
from utils.logger import get_logger


logger = get_logger(__name__)

TableEntries = Tuple[Tuple[int, int], ...]


class BlockMode(IntEnum):
    RAW = MODE_RAW
    HUFFMAN = MODE_HUFFMAN


@dataclass(frozen=True)
class CompressedBlock:
    """
    One coded block. `table` is (symbol, length) in increasing symbol order
    (empty for Raw); `payload` holds `payload_bits` MSB-first bits, zero-padded.
    """

    mode: BlockMode
    sample_count: int
    table: TableEntries
    payload: bytes
    payload_bits: int

    def __post_init__(self) -> None:
        if not 1 <= self.sample_count <= MAX_BLOCK_SIZE:
            raise InvalidInputError(f"sample_count {self.sample_count} outside [1, {MAX_BLOCK_SIZE}].")
        if len(self.payload) != (self.payload_bits + 7) // 8:
            raise InvalidInputError("Payload byte length does not match payload_bits.")
        if self.mode == BlockMode.RAW:
            if self.table:
                raise InvalidInputError("Raw blocks carry no code table.")
            if self.payload_bits != SAMPLE_BITS * self.sample_count:
                raise InvalidInputError("Raw payload must hold 16 bits per sample.")
        elif not self.table:
            raise InvalidInputError("Huffman blocks need a non-empty code table.")


@dataclass(frozen=True)
class BlockEncodeResult:
    block: CompressedBlock
    huffman_bits: int
    raw_bits: int

    @property
    def mode(self) -> BlockMode:
        return self.block.mode


@dataclass(frozen=True)
class DecodeTable:
    """
    Canonical decoding state, indexed by code length (index 0 unused).
    """

    first_code: Tuple[int, ...]
    first_index: Tuple[int, ...]
    counts: Tuple[int, ...]
    sorted_symbols: Tuple[int, ...]
    max_length: int
    limits: Tuple[int, ...]  # left-aligned upper bound per length, index 0 is length 1


# =========================
# SIZE ESTIMATION
# =========================
def estimate_encoded_bits(freq: FrequencyTable, lengths: CodeLengthTable) -> int:
    if not np.array_equal(freq.symbols, lengths.symbols):
        raise InternalConsistencyError("Frequency and code-length tables cover different symbols.")
    return int(np.dot(freq.counts, lengths.lengths))


# =========================
# SYMBOL ENCODER / FALLBACK HANDLER
# =========================
def _pack_codewords(symbols: np.ndarray, codebook: CanonicalCodebook) -> Tuple[bytes, int]:
    code_lut = np.zeros(ALPHABET_SIZE, dtype=np.int64)
    len_lut = np.zeros(ALPHABET_SIZE, dtype=np.int64)
    code_lut[codebook.symbols] = codebook.codes
    len_lut[codebook.symbols] = codebook.lengths

    codes = code_lut[symbols]
    lens = len_lut[symbols]
    width = int(lens.max())

    shifts = lens[:, None] - 1 - np.arange(width, dtype=np.int64)[None, :]
    used = shifts >= 0
    bits = (codes[:, None] >> np.where(used, shifts, 0)) & 1
    flat = bits[used].astype(np.uint8)
    return np.packbits(flat).tobytes(), int(flat.size)


def encode_block(samples: Sequence[int]) -> BlockEncodeResult:
    symbols = as_symbols(samples)
    n = int(symbols.size)
    if n == 0:
        raise InvalidInputError("Cannot encode an empty block.")
    if n > MAX_BLOCK_SIZE:
        raise InvalidInputError(f"Block holds {n} samples; at most {MAX_BLOCK_SIZE} are allowed.")

    freq = compute_frequencies(symbols)
    lengths = build_code_lengths(freq)
    payload_bits = estimate_encoded_bits(freq, lengths)

    huffman_bits = huffman_record_bits(len(freq), payload_bits)
    raw_bits = raw_record_bits(n)

    if huffman_bits < raw_bits:
        codebook = assign_canonical_codes(lengths)
        payload, packed_bits = _pack_codewords(symbols, codebook)
        if packed_bits != payload_bits:
            raise InternalConsistencyError(f"Packed {packed_bits} bits, expected {payload_bits}.")
        block = CompressedBlock(
            mode=BlockMode.HUFFMAN,
            sample_count=n,
            table=tuple(lengths.pairs()),
            payload=payload,
            payload_bits=payload_bits,
        )
    else:
        block = CompressedBlock(
            mode=BlockMode.RAW,
            sample_count=n,
            table=(),
            payload=symbols.astype("<u2").tobytes(),
            payload_bits=SAMPLE_BITS * n,
        )

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "block n=%d distinct=%d huffman_bits=%d raw_bits=%d mode=%s",
            n, len(freq), huffman_bits, raw_bits, block.mode.name,
        )
    return BlockEncodeResult(block=block, huffman_bits=huffman_bits, raw_bits=raw_bits)


# =========================
# DECODER
# =========================
def build_decode_table(table: Sequence[Tuple[int, int]]) -> DecodeTable:
    if not table:
        raise CorruptStreamError("Empty code table.")

    symbols = [int(s) for s, _ in table]
    lengths = [int(l) for _, l in table]
    if any(s < 0 or s >= ALPHABET_SIZE for s in symbols):
        raise CorruptStreamError("Code table symbol outside [0, 65535].")
    if any(b <= a for a, b in zip(symbols, symbols[1:])):
        raise CorruptStreamError("Code table symbols are not strictly increasing.")
    if not kraft_is_valid(lengths):
        raise CorruptStreamError("Code table lengths violate the Kraft equality.")

    max_length = max(lengths)
    counts = [0] * (MAX_CODE_LENGTH + 1)
    for l in lengths:
        counts[l] += 1

    first_code = [0] * (MAX_CODE_LENGTH + 1)
    first_index = [0] * (MAX_CODE_LENGTH + 1)
    code = 0
    index = 0
    for l in range(1, MAX_CODE_LENGTH + 1):
        first_code[l] = code
        first_index[l] = index
        code = (code + counts[l]) << 1
        index += counts[l]

    limits = tuple((first_code[l] + counts[l]) << (max_length - l) for l in range(1, max_length + 1))
    sorted_symbols = tuple(s for _, s in sorted(zip(lengths, symbols)))
    return DecodeTable(
        first_code=tuple(first_code),
        first_index=tuple(first_index),
        counts=tuple(counts),
        sorted_symbols=sorted_symbols,
        max_length=max_length,
        limits=limits,
    )


def _windows(bits: np.ndarray, width: int) -> np.ndarray:
    # next `width` bits at every position as an integer, zero past the end
    padded = np.concatenate((bits.astype(np.int64), np.zeros(width, dtype=np.int64)))
    n = bits.size
    out = np.zeros(n, dtype=np.int64)
    for t in range(width):
        out = (out << 1) | padded[t : t + n]
    return out


def decode_symbols(
    table: DecodeTable, bits: Sequence[int], count: int, start: int = 0
) -> Tuple[np.ndarray, int]:
    """
    Decode `count` symbols from a 0/1 bit array starting at `start`.
    Returns (uint16 symbols, end position).

    Each position gets the code length and symbol it would decode to; only the
    walk from one codeword start to the next is sequential.
    """
    bits = np.asarray(bits, dtype=np.uint8)[start:]
    n_bits = int(bits.size)
    if count == 0:
        return np.zeros(0, dtype=np.uint16), start

    width = table.max_length
    windows = _windows(bits, width)
    lens = np.searchsorted(np.array(table.limits, dtype=np.int64), windows, side="right") + 1
    valid = lens <= width
    at = np.where(valid, lens, width)

    first_code = np.array(table.first_code, dtype=np.int64)
    first_index = np.array(table.first_index, dtype=np.int64)
    index = first_index[at] + (windows >> (width - at)) - first_code[at]

    starts: List[int] = []
    step = np.where(valid, lens, 0).tolist()
    pos = 0
    for i in range(count):
        if pos >= n_bits:
            raise CorruptStreamError(f"Payload exhausted after {i} of {count} symbols.")
        length = step[pos]
        if length == 0:
            raise CorruptStreamError(f"Bit pattern with no canonical match at symbol {i}.")
        starts.append(pos)
        pos += length
    if pos > n_bits:
        raise CorruptStreamError(f"Payload exhausted after {count - 1} of {count} symbols.")

    symbols = np.array(table.sorted_symbols, dtype=np.uint16)[index[starts]]
    return symbols, start + pos


def decode_block(block: CompressedBlock) -> np.ndarray:
    if block.mode == BlockMode.RAW:
        samples = np.frombuffer(block.payload, dtype="<u2")
        if samples.size != block.sample_count:
            raise CorruptStreamError(f"Raw payload holds {samples.size} samples, expected {block.sample_count}.")
        return samples.astype(np.uint16)

    table = build_decode_table(block.table)
    bits = np.unpackbits(np.frombuffer(block.payload, dtype=np.uint8))[: block.payload_bits]
    symbols, used = decode_symbols(table, bits, block.sample_count)
    if used != block.payload_bits:
        raise CorruptStreamError(f"Payload has {block.payload_bits - used} trailing bits after the last symbol.")
    return symbols
