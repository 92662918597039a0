from __future__ import annotations

import argparse
import io
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from audio_io.wav_io import AudioMeta, read_wav, wav_size, write_wav
from bench.benchmark import buffering_latency_ms, run_bench, summarize, write_report
from codec.block_codec import BlockMode
from codec.pipeline import check_block_size, decode_stream, encode_stream
from container.layout import FILE_EXTENSION, HEADER_SIZE
from container.stream_format import read_stream_samples
from huffman.code_builder import block_entropy, compute_frequencies
from signals.generators import GeneratorSpec, SignalKind, generate
from utils.config import Settings, load_settings
from utils.errors import (
    CorruptStreamError,
    InternalConsistencyError,
    InvalidInputError,
    UnsupportedFormatError,
    VerificationError,
)
from utils.fileio import atomic_output
from utils.logger import get_logger, set_level


logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CORRUPT = 3
EXIT_MISMATCH = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for I/O failures here
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ratio(compressed: int, original: int) -> float:
    return 100.0 * compressed / original


# =========================
# COMMANDS
# =========================
def cmd_encode(args: argparse.Namespace) -> int:
    block_size = check_block_size(args.block_size)
    out = args.out or str(Path(args.input).with_suffix(FILE_EXTENSION))

    meta, samples = read_wav(args.input)
    with atomic_output(out) as f:
        summary = encode_stream(
            samples,
            f,
            sample_rate=meta.sample_rate,
            channels=meta.channels,
            block_size=block_size,
            parallel=args.parallel,
        )

    original = wav_size(int(samples.size))
    ratio = _ratio(summary.total_bytes, original)
    print(
        f"✅ Encoded {args.input} -> {out}: original={original} bytes compressed={summary.total_bytes} bytes "
        f"ratio={ratio:.2f}% blocks={summary.blocks} (huffman={summary.huffman_blocks}, raw={summary.raw_blocks})"
    )
    return EXIT_OK


def cmd_decode(args: argparse.Namespace) -> int:
    out = args.out or str(Path(args.input).with_suffix(".wav"))

    with open(args.input, "rb") as f:
        data = f.read()
    header, samples = decode_stream(data)

    meta = AudioMeta(sample_rate=header.sample_rate, channels=header.channels)
    with atomic_output(out) as f:
        written = write_wav(meta, samples, f)

    print(f"✅ Decoded {args.input} -> {out}: {header.total_samples} samples, {written} bytes")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    block_size = check_block_size(args.block_size)
    meta, samples = read_wav(args.input)

    buf = io.BytesIO()
    summary = encode_stream(
        samples,
        buf,
        sample_rate=meta.sample_rate,
        channels=meta.channels,
        block_size=block_size,
        parallel=args.parallel,
    )
    header, decoded = decode_stream(buf.getvalue())

    if header.channels != meta.channels or header.sample_rate != meta.sample_rate:
        raise VerificationError("Stream header does not match the source WAV format.")
    if not np.array_equal(decoded, samples):
        mismatch = int(np.flatnonzero(decoded != samples)[0]) if decoded.size == samples.size else -1
        raise VerificationError(f"Decoded samples differ from the source (first mismatch at index {mismatch}).")

    original = wav_size(int(samples.size))
    ratio = _ratio(summary.total_bytes, original)
    print(
        f"✅ Lossless round trip OK for {args.input}: {samples.size} samples, "
        f"ratio={ratio:.2f}% reduction={100.0 - ratio:.2f}% blocks={summary.blocks}"
    )
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        kind=SignalKind(args.kind),
        seconds=args.seconds,
        sample_rate=args.sample_rate,
        amplitude=args.amplitude,
        frequency=args.frequency,
        seed=args.seed,
    )
    samples = generate(spec)

    with atomic_output(args.out) as f:
        written = write_wav(AudioMeta(sample_rate=spec.sample_rate, channels=1), samples, f)

    print(f"✅ Generated {spec.kind.value} ({spec.num_samples} samples) -> {args.out} ({written} bytes)")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    block_size = check_block_size(args.block_size)
    out = args.out or os.path.join(settings.artifacts_dir, "bench_results.csv")

    df = run_bench(
        seed=args.seed,
        seconds=args.seconds,
        sample_rate=args.sample_rate,
        block_size=block_size,
        amplitude=args.amplitude,
        frequency=args.frequency,
        real_audio=args.real_audio,
        parallel=args.parallel,
    )
    summary = summarize(df, block_size=block_size, sample_rate=args.sample_rate, seed=args.seed, seconds=args.seconds)
    csv_path, json_path = write_report(df, summary, out)

    print(df.to_string(index=False))
    print(f"Buffering latency: {buffering_latency_ms(block_size, args.sample_rate):.2f} ms (block_size / sample_rate)")
    print(f"✅ Benchmark written to {csv_path} (summary: {json_path})")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    with open(args.input, "rb") as f:
        data = f.read()
    header, records = read_stream_samples(data)

    huffman = raw = 0
    weighted_entropy = 0.0
    for block, samples in records:
        if block.mode == BlockMode.HUFFMAN:
            huffman += 1
        else:
            raw += 1
        weighted_entropy += block_entropy(compute_frequencies(samples)) * block.sample_count

    bits_per_sample = 8.0 * (len(data) - HEADER_SIZE) / header.total_samples if header.total_samples else 0.0
    entropy = weighted_entropy / header.total_samples if header.total_samples else 0.0
    print(f"file:            {args.input} ({len(data)} bytes)")
    print(f"sample_rate:     {header.sample_rate} Hz")
    print(f"channels:        {header.channels}")
    print(f"block_size:      {header.block_size} samples")
    print(f"total_samples:   {header.total_samples}")
    print(f"blocks:          {huffman + raw} (huffman={huffman}, raw={raw})")
    print(f"bits/sample:     {bits_per_sample:.3f}")
    print(f"entropy:         {entropy:.3f} bits/sample (block-weighted)")
    print(f"buffer latency:  {buffering_latency_ms(header.block_size, header.sample_rate):.2f} ms")
    return EXIT_OK


# =========================
# PARSER
# =========================
def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = _Parser(prog="obhs", description="Block-wise canonical Huffman codec for 16-bit PCM audio.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="WAV -> .obhs")
    p.add_argument("input")
    p.add_argument("--out", help="output .obhs path (default: input with .obhs suffix)")
    p.add_argument("--block-size", type=int, default=settings.block_size)
    p.add_argument("--parallel", action="store_true", help="encode blocks concurrently")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", help=".obhs -> WAV")
    p.add_argument("input")
    p.add_argument("--out", help="output WAV path (default: input with .wav suffix)")
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("verify", help="encode and decode in memory, compare samples")
    p.add_argument("input")
    p.add_argument("--block-size", type=int, default=settings.block_size)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("gen", help="write a deterministic test signal as WAV")
    p.add_argument("kind", choices=[k.value for k in SignalKind])
    p.add_argument("--out", required=True)
    p.add_argument("--seconds", type=float, default=settings.seconds)
    p.add_argument("--seed", type=int, default=settings.seed)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--frequency", type=float, default=440.0)
    p.add_argument("--sample-rate", type=int, default=settings.sample_rate)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("bench", help="compression ratio and per-block latency report (CSV)")
    p.add_argument("real_audio", nargs="*", help="optional 16-bit PCM WAV files to add as rows")
    p.add_argument("--out", help="CSV path (default: <artifacts>/bench_results.csv)")
    p.add_argument("--seconds", type=float, default=settings.seconds)
    p.add_argument("--seed", type=int, default=settings.seed)
    p.add_argument("--amplitude", type=float, default=None, help="override tone/pink amplitude")
    p.add_argument("--frequency", type=float, default=440.0)
    p.add_argument("--sample-rate", type=int, default=settings.sample_rate)
    p.add_argument("--block-size", type=int, default=settings.block_size)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(handler=lambda a: cmd_bench(a, settings))

    p = sub.add_parser("inspect", help="summarize an .obhs stream")
    p.add_argument("input")
    p.set_defaults(handler=cmd_inspect)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = load_settings()
    except RuntimeError as exc:
        print(f"❌ Configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    set_level(settings.log_level)
    args = build_parser(settings).parse_args(argv)
    if args.verbose:
        set_level("DEBUG")

    try:
        return args.handler(args)
    except (VerificationError, InternalConsistencyError) as exc:
        print(f"❌ Verification failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (CorruptStreamError, UnsupportedFormatError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except InvalidInputError as exc:
        print(f"❌ Invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"❌ I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
