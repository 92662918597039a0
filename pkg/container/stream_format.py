from __future__ import annotations

from dataclasses import dataclass
from typing import BinaryIO, Iterator, Sequence, Tuple, Union

import numpy as np

from codec.block_codec import (
    BlockEncodeResult,
    BlockMode,
    CompressedBlock,
    build_decode_table,
    decode_symbols,
)
from container.bitstream import BitSink, BitSource
from container.layout import (
    COUNT_BITS,
    HEADER_SIZE,
    HEADER_STRUCT,
    LENGTH_BITS,
    MAGIC,
    MAX_BLOCK_SIZE,
    MIN_BLOCK_SIZE,
    MODE_BITS,
    SAMPLE_BITS,
    SYMBOL_BITS,
    VERSION,
)
from utils.errors import CorruptStreamError, InvalidInputError, UnsupportedFormatError
from utils.logger import get_logger


logger = get_logger(__name__)

BlockLike = Union[BlockEncodeResult, CompressedBlock]
StreamSource = Union[bytes, bytearray, BinaryIO]
DecodedRecord = Tuple[CompressedBlock, np.ndarray]


@dataclass(frozen=True)
class StreamHeader:
    sample_rate: int
    channels: int
    block_size: int
    total_samples: int
    magic: bytes = MAGIC
    version: int = VERSION
    flags: int = 0
    reserved: int = 0

    @property
    def block_count(self) -> int:
        return -(-self.total_samples // self.block_size)

    def validate(self) -> None:
        if self.magic != MAGIC or self.version != VERSION or self.flags != 0 or self.reserved != 0:
            raise InvalidInputError("Header must carry magic OBHS, version 1, zero flags and reserved byte.")
        if not 1 <= self.channels <= 255:
            raise InvalidInputError(f"channels must be in [1, 255], got {self.channels}.")
        if not 1 <= self.sample_rate < 1 << 32:
            raise InvalidInputError(f"sample_rate {self.sample_rate} does not fit the header.")
        if not MIN_BLOCK_SIZE <= self.block_size <= MAX_BLOCK_SIZE:
            raise InvalidInputError(f"block_size must be in [{MIN_BLOCK_SIZE}, {MAX_BLOCK_SIZE}], got {self.block_size}.")
        if not 0 <= self.total_samples < 1 << 64:
            raise InvalidInputError(f"total_samples {self.total_samples} does not fit the header.")
        if self.total_samples % self.channels:
            raise InvalidInputError(
                f"total_samples {self.total_samples} is not a whole number of {self.channels}-channel frames."
            )

    def pack(self) -> bytes:
        self.validate()
        return HEADER_STRUCT.pack(
            self.magic,
            self.version,
            self.flags,
            self.channels,
            self.reserved,
            self.sample_rate,
            self.block_size,
            self.total_samples,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "StreamHeader":
        if len(data) < HEADER_SIZE:
            raise CorruptStreamError(f"Stream header truncated: {len(data)} of {HEADER_SIZE} bytes.", offset=0)

        magic, version, flags, channels, reserved, sample_rate, block_size, total = HEADER_STRUCT.unpack_from(data)
        if magic != MAGIC:
            raise UnsupportedFormatError(f"Not an OBHS stream (magic {magic!r}).")
        if version != VERSION:
            raise UnsupportedFormatError(f"Unsupported OBHS version {version}.")
        if flags != 0 or reserved != 0:
            raise UnsupportedFormatError(f"Unsupported header flags {flags:#x} / reserved {reserved:#x}.")
        if channels == 0 or sample_rate == 0:
            raise CorruptStreamError("Header declares zero channels or zero sample rate.", offset=6)
        if not MIN_BLOCK_SIZE <= block_size <= MAX_BLOCK_SIZE:
            raise CorruptStreamError(f"Header block_size {block_size} out of range.", offset=12)
        if total % channels:
            raise CorruptStreamError(
                f"Header total_samples {total} is not a whole number of {channels}-channel frames.", offset=16
            )

        return cls(sample_rate=sample_rate, channels=channels, block_size=block_size, total_samples=total)


# =========================
# BLOCK RECORDS
# =========================
def _as_block(item: BlockLike) -> CompressedBlock:
    return item.block if isinstance(item, BlockEncodeResult) else item


def serialize_block(result: BlockLike, sink: BitSink) -> int:
    """
    Append one byte-aligned block record; returns the bytes it occupies.
    """
    if not sink.is_aligned:
        raise InvalidInputError("Block records must start on a byte boundary.")
    block = _as_block(result)
    start = sink.bit_length

    sink.write_bits(int(block.mode), MODE_BITS)
    sink.write_bits(block.sample_count - 1, COUNT_BITS)
    if block.mode == BlockMode.HUFFMAN:
        sink.write_bits(len(block.table) - 1, COUNT_BITS)
        for symbol, length in block.table:
            sink.write_bits(symbol, SYMBOL_BITS)
            sink.write_bits(length - 1, LENGTH_BITS)
    # Raw payload is already little-endian sample bytes, low byte first
    sink.write_packed(block.payload, block.payload_bits)
    sink.align()

    return (sink.bit_length - start) // 8


def _parse_record(source: BitSource, block_size: int) -> Tuple[CompressedBlock, np.ndarray]:
    if not source.is_aligned:
        raise CorruptStreamError("Block record does not start on a byte boundary.", offset=source.byte_offset)
    start = source.byte_offset

    try:
        mode = source.read_bits(MODE_BITS)
        sample_count = source.read_bits(COUNT_BITS) + 1
        if sample_count > block_size:
            raise CorruptStreamError(f"Block declares {sample_count} samples; block_size is {block_size}.")

        if mode == BlockMode.HUFFMAN:
            distinct = source.read_bits(COUNT_BITS) + 1
            if distinct > sample_count:
                raise CorruptStreamError(f"Code table has {distinct} entries for {sample_count} samples.")
            table = tuple(
                (source.read_bits(SYMBOL_BITS), source.read_bits(LENGTH_BITS) + 1) for _ in range(distinct)
            )
            decode_table = build_decode_table(table)

            # the payload length is only known once its symbols are decoded
            bits = source.peek_bits(sample_count * decode_table.max_length)
            samples, used = decode_symbols(decode_table, bits, sample_count)
            block = CompressedBlock(
                mode=BlockMode.HUFFMAN,
                sample_count=sample_count,
                table=table,
                payload=source.read_packed(used),
                payload_bits=used,
            )
        else:
            nbits = SAMPLE_BITS * sample_count
            block = CompressedBlock(
                mode=BlockMode.RAW,
                sample_count=sample_count,
                table=(),
                payload=source.read_packed(nbits),
                payload_bits=nbits,
            )
            samples = np.frombuffer(block.payload, dtype="<u2").astype(np.uint16)
        source.align()
    except CorruptStreamError as exc:
        if exc.offset is None:
            raise CorruptStreamError(exc.detail, offset=start) from exc
        raise

    return block, samples


def parse_block(source: BitSource, block_size: int) -> CompressedBlock:
    return _parse_record(source, block_size)[0]


# =========================
# STREAMS
# =========================
def write_stream(header: StreamHeader, blocks: Sequence[BlockLike], sink: BinaryIO) -> int:
    header.validate()
    coded = [_as_block(b) for b in blocks]

    if len(coded) != header.block_count:
        raise InvalidInputError(f"Header implies {header.block_count} blocks, got {len(coded)}.")
    for index, block in enumerate(coded[:-1]):
        if block.sample_count != header.block_size:
            raise InvalidInputError(
                f"Block {index} holds {block.sample_count} samples; only the last block may be short."
            )
    if coded and coded[-1].sample_count > header.block_size:
        raise InvalidInputError("Last block exceeds block_size.")
    if sum(b.sample_count for b in coded) != header.total_samples:
        raise InvalidInputError("Block sample counts do not add up to total_samples.")

    head = header.pack()
    sink.write(head)
    total = len(head)
    for block in coded:
        bits = BitSink()
        serialize_block(block, bits)
        record = bits.getvalue()
        sink.write(record)
        total += len(record)

    logger.debug("wrote %d blocks, %d bytes", len(coded), total)
    return total


def _iter_records(header: StreamHeader, source: BitSource) -> Iterator[DecodedRecord]:
    remaining = header.total_samples
    for index in range(header.block_count):
        expected = min(header.block_size, remaining)
        try:
            block, samples = _parse_record(source, header.block_size)
        except CorruptStreamError as exc:
            raise exc.at_block(index) from exc
        if block.sample_count != expected:
            raise CorruptStreamError(
                f"Block holds {block.sample_count} samples; header total_samples implies {expected}.",
                offset=source.byte_offset,
                block_index=index,
            )
        remaining -= expected
        yield block, samples

    if source.remaining_bits:
        raise CorruptStreamError(
            f"{source.remaining_bits // 8} trailing bytes after the last block; header total_samples is inconsistent.",
            offset=source.byte_offset,
        )


def _open(source: StreamSource) -> Tuple[StreamHeader, BitSource]:
    data = bytes(source) if isinstance(source, (bytes, bytearray)) else source.read()
    header = StreamHeader.unpack(data)
    return header, BitSource(data, byte_offset=HEADER_SIZE)


def read_stream(source: StreamSource) -> Tuple[StreamHeader, Iterator[CompressedBlock]]:
    """
    Parse the header eagerly; blocks are parsed lazily as the iterator is consumed.
    """
    header, bits = _open(source)
    return header, (block for block, _ in _iter_records(header, bits))


def read_stream_samples(source: StreamSource) -> Tuple[StreamHeader, Iterator[DecodedRecord]]:
    """
    Like read_stream, but each block comes with its decoded samples.
    """
    header, bits = _open(source)
    return header, _iter_records(header, bits)
