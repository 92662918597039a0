from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional, Sequence, Tuple, Union

import numpy as np

from huffman.code_builder import as_symbols, pcm_to_symbols
from utils.errors import InvalidInputError, UnsupportedFormatError


WAVE_FORMAT_PCM = 1
BITS_PER_SAMPLE = 16
WAV_HEADER_SIZE = 44

_RIFF_HEADER = struct.Struct("<4sI4s")
_CHUNK_HEADER = struct.Struct("<4sI")
_FMT_PCM = struct.Struct("<HHIIHH")

Source = Union[str, os.PathLike, bytes, bytearray, BinaryIO]
Sink = Union[str, os.PathLike, BinaryIO]


@dataclass(frozen=True)
class AudioMeta:
    sample_rate: int
    channels: int
    bits_per_sample: int = BITS_PER_SAMPLE

    def __post_init__(self) -> None:
        if self.bits_per_sample != BITS_PER_SAMPLE:
            raise UnsupportedFormatError(f"Only 16-bit PCM is supported, got {self.bits_per_sample}-bit.")
        if self.channels < 1:
            raise InvalidInputError(f"channels must be >= 1, got {self.channels}.")
        if self.sample_rate < 1:
            raise InvalidInputError(f"sample_rate must be >= 1, got {self.sample_rate}.")

    @property
    def block_align(self) -> int:
        return self.channels * self.bits_per_sample // 8

    @property
    def byte_rate(self) -> int:
        return self.sample_rate * self.block_align


def wav_size(total_samples: int) -> int:
    """Size of the canonical 44-byte-header WAV holding `total_samples` values."""
    return WAV_HEADER_SIZE + 2 * total_samples


def _read_all(source: Source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as f:
            return f.read()
    return source.read()


def read_wav(source: Source) -> Tuple[AudioMeta, np.ndarray]:
    """
    Parse a RIFF/WAVE PCM file. Unknown chunks are skipped; chunks may
    appear in any order. Samples come back interleaved as uint16 symbols.
    """
    data = _read_all(source)
    if len(data) < _RIFF_HEADER.size:
        raise UnsupportedFormatError("File too short to be a WAV file.")

    riff, _, wave = _RIFF_HEADER.unpack_from(data)
    if riff != b"RIFF" or wave != b"WAVE":
        raise UnsupportedFormatError("Not a RIFF/WAVE file.")

    meta: Optional[AudioMeta] = None
    pcm: Optional[bytes] = None
    pos = _RIFF_HEADER.size

    while pos + _CHUNK_HEADER.size <= len(data):
        chunk_id, size = _CHUNK_HEADER.unpack_from(data, pos)
        body_start = pos + _CHUNK_HEADER.size
        body_end = body_start + size
        if body_end > len(data):
            raise UnsupportedFormatError(
                f"Chunk {chunk_id!r} at byte {pos} claims {size} bytes past the end of the file."
            )

        if chunk_id == b"fmt ":
            if size < _FMT_PCM.size:
                raise UnsupportedFormatError(f"fmt chunk too short ({size} bytes).")
            fmt_tag, channels, sample_rate, _, _, bits = _FMT_PCM.unpack_from(data, body_start)
            if fmt_tag != WAVE_FORMAT_PCM:
                raise UnsupportedFormatError(f"Unsupported WAV codec tag {fmt_tag:#06x}; only PCM (1) is accepted.")
            if bits != BITS_PER_SAMPLE:
                raise UnsupportedFormatError(f"Only 16-bit PCM is supported, got {bits}-bit.")
            if channels < 1 or sample_rate < 1:
                raise UnsupportedFormatError("fmt chunk declares zero channels or zero sample rate.")
            meta = AudioMeta(sample_rate=sample_rate, channels=channels, bits_per_sample=bits)
        elif chunk_id == b"data":
            pcm = data[body_start:body_end]

        # chunks are word-aligned
        pos = body_end + (size & 1)

    if meta is None:
        raise UnsupportedFormatError("WAV file has no fmt chunk.")
    if pcm is None:
        raise UnsupportedFormatError("WAV file has no data chunk.")
    if len(pcm) % meta.block_align:
        raise UnsupportedFormatError(
            f"data chunk length {len(pcm)} is not a multiple of the frame size {meta.block_align}."
        )

    return meta, pcm_to_symbols(np.frombuffer(pcm, dtype="<i2").astype(np.int16))


def encode_wav(meta: AudioMeta, samples: Sequence[int]) -> bytes:
    symbols = as_symbols(samples)
    if symbols.size % meta.channels:
        raise InvalidInputError(f"{symbols.size} samples do not form whole {meta.channels}-channel frames.")
    body = symbols.astype("<u2").tobytes()
    header = _RIFF_HEADER.pack(b"RIFF", 4 + (8 + _FMT_PCM.size) + (8 + len(body)), b"WAVE")
    fmt = _CHUNK_HEADER.pack(b"fmt ", _FMT_PCM.size) + _FMT_PCM.pack(
        WAVE_FORMAT_PCM,
        meta.channels,
        meta.sample_rate,
        meta.byte_rate,
        meta.block_align,
        meta.bits_per_sample,
    )
    data_head = _CHUNK_HEADER.pack(b"data", len(body))
    return header + fmt + data_head + body


def write_wav(meta: AudioMeta, samples: Sequence[int], sink: Sink) -> int:
    """
    Canonical layout: RIFF header, 16-byte fmt chunk, data chunk.
    """
    blob = encode_wav(meta, samples)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as f:
            f.write(blob)
    else:
        sink.write(blob)
    return len(blob)
