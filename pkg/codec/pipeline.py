from __future__ import annotations

from dataclasses import dataclass
from typing import BinaryIO, List, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from codec.block_codec import BlockEncodeResult, BlockMode, encode_block
from container.layout import MAX_BLOCK_SIZE, MIN_BLOCK_SIZE
from container.stream_format import StreamHeader, read_stream_samples, write_stream
from huffman.code_builder import as_symbols
from utils.errors import InvalidInputError
from utils.logger import get_logger


logger = get_logger(__name__)


@dataclass(frozen=True)
class StreamSummary:
    header: StreamHeader
    total_bytes: int
    huffman_blocks: int
    raw_blocks: int

    @property
    def blocks(self) -> int:
        return self.huffman_blocks + self.raw_blocks


def check_block_size(block_size: int) -> int:
    if not MIN_BLOCK_SIZE <= block_size <= MAX_BLOCK_SIZE:
        raise InvalidInputError(f"block_size must be in [{MIN_BLOCK_SIZE}, {MAX_BLOCK_SIZE}], got {block_size}.")
    return block_size


def partition_blocks(samples: Sequence[int], block_size: int) -> List[np.ndarray]:
    """
    Split into consecutive views of `block_size` samples; the last may be short.
    """
    symbols = as_symbols(samples)
    check_block_size(block_size)
    return [symbols[i : i + block_size] for i in range(0, symbols.size, block_size)]


def encode_samples(
    samples: Sequence[int],
    block_size: int,
    parallel: bool = False,
    n_jobs: int = -1,
) -> List[BlockEncodeResult]:
    blocks = partition_blocks(samples, block_size)
    if parallel and len(blocks) > 1:
        # blocks are independent, so results match the sequential path exactly
        return list(Parallel(n_jobs=n_jobs)(delayed(encode_block)(b) for b in blocks))
    return [encode_block(b) for b in blocks]


def encode_stream(
    samples: Sequence[int],
    sink: BinaryIO,
    sample_rate: int,
    channels: int = 1,
    block_size: int = 4096,
    parallel: bool = False,
) -> StreamSummary:
    symbols = as_symbols(samples)
    results = encode_samples(symbols, block_size, parallel=parallel)
    header = StreamHeader(
        sample_rate=sample_rate,
        channels=channels,
        block_size=block_size,
        total_samples=int(symbols.size),
    )
    total = write_stream(header, results, sink)

    raw = sum(1 for r in results if r.mode == BlockMode.RAW)
    if results and raw == len(results):
        logger.warning("every block fell back to Raw; the signal is incompressible at this block size")
    return StreamSummary(header=header, total_bytes=total, huffman_blocks=len(results) - raw, raw_blocks=raw)


def decode_stream(source: Union[bytes, bytearray, BinaryIO]) -> Tuple[StreamHeader, np.ndarray]:
    header, records = read_stream_samples(source)
    parts = [samples for _, samples in records]
    if not parts:
        return header, np.zeros(0, dtype=np.uint16)
    return header, np.concatenate(parts)
