"""
Wire layout of an .obhs stream.

Stream header (24 bytes, little-endian):
    magic "OBHS" | version u8 | flags u8 | channels u8 | reserved u8 |
    sample_rate u32 | block_size u32 | total_samples u64

Block record (MSB-first bits, zero-padded to a byte boundary):
    mode:1 (1 = Huffman, 0 = Raw) | sample_count-1:16 |
    Huffman: distinct_count-1:16, (symbol:16, length-1:5) * distinct_count, codewords
    Raw:     sample_count little-endian 16-bit samples
"""
from __future__ import annotations

import struct


MAGIC = b"OBHS"
VERSION = 1
FILE_EXTENSION = ".obhs"

HEADER_STRUCT = struct.Struct("<4sBBBBIIQ")
HEADER_SIZE = HEADER_STRUCT.size  # 24

MIN_BLOCK_SIZE = 256
MAX_BLOCK_SIZE = 65536

MODE_BITS = 1
COUNT_BITS = 16
SYMBOL_BITS = 16
LENGTH_BITS = 5
SAMPLE_BITS = 16

MODE_RAW = 0
MODE_HUFFMAN = 1

# mode + sample_count
RECORD_PREFIX_BITS = MODE_BITS + COUNT_BITS
# prefix + distinct_count
HUFFMAN_PREFIX_BITS = RECORD_PREFIX_BITS + COUNT_BITS
TABLE_ENTRY_BITS = SYMBOL_BITS + LENGTH_BITS

# worst-case bytes a record adds on top of 2 bytes per sample
MAX_RECORD_OVERHEAD_BYTES = 3


def huffman_record_bits(distinct_count: int, payload_bits: int) -> int:
    return HUFFMAN_PREFIX_BITS + TABLE_ENTRY_BITS * distinct_count + payload_bits


def raw_record_bits(sample_count: int) -> int:
    return RECORD_PREFIX_BITS + SAMPLE_BITS * sample_count


def padded_bytes(bits: int) -> int:
    return (bits + 7) // 8


def max_stream_bytes(total_samples: int, block_size: int) -> int:
    """No-expansion bound: header + 3 bytes per block + 2 bytes per sample."""
    blocks = -(-total_samples // block_size)
    return HEADER_SIZE + MAX_RECORD_OVERHEAD_BYTES * blocks + 2 * total_samples
