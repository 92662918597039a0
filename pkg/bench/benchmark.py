from __future__ import annotations

import io
import json
import os
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from audio_io.wav_io import read_wav, wav_size
from codec.block_codec import BlockEncodeResult, encode_block
from codec.pipeline import partition_blocks
from container.stream_format import StreamHeader, write_stream
from signals.generators import GeneratorSpec, SignalKind, generate
from utils.fileio import atomic_output
from utils.logger import get_logger


logger = get_logger(__name__)

CSV_COLUMNS = [
    "content",
    "original_bytes",
    "compressed_bytes",
    "ratio_pct",
    "reduction_pct",
    "median_block_encode_us",
    "p95_block_encode_us",
    "blocks",
]

GENERATED_CONTENT = [
    ("silence", SignalKind.SILENCE),
    ("pink", SignalKind.PINK),
    ("tone", SignalKind.TONE),
]


@dataclass
class BenchRecord:
    content: str
    original_bytes: int
    compressed_bytes: int
    ratio_pct: float
    reduction_pct: float
    median_block_encode_us: float
    p95_block_encode_us: float
    blocks: int


def buffering_latency_ms(block_size: int, sample_rate: int) -> float:
    """Time to fill one block before it can be encoded."""
    return 1000.0 * block_size / sample_rate


def _timed_encode(block: np.ndarray) -> Tuple[BlockEncodeResult, int]:
    t0 = time.perf_counter_ns()
    result = encode_block(block)
    return result, time.perf_counter_ns() - t0


def measure_content(
    label: str,
    samples: np.ndarray,
    sample_rate: int,
    block_size: int,
    channels: int = 1,
    parallel: bool = False,
) -> BenchRecord:
    """
    Encode one signal, timing encode_block per block (I/O excluded).
    """
    blocks = partition_blocks(samples, block_size)
    if parallel and len(blocks) > 1:
        timed = Parallel(n_jobs=-1)(delayed(_timed_encode)(b) for b in blocks)
    else:
        timed = [_timed_encode(b) for b in blocks]

    results = [r for r, _ in timed]
    times_us = pd.Series([ns / 1000.0 for _, ns in timed], dtype="float64")

    header = StreamHeader(
        sample_rate=sample_rate,
        channels=channels,
        block_size=block_size,
        total_samples=int(samples.size),
    )
    compressed = write_stream(header, results, io.BytesIO())
    original = wav_size(int(samples.size))

    ratio = 100.0 * compressed / original
    record = BenchRecord(
        content=label,
        original_bytes=original,
        compressed_bytes=compressed,
        ratio_pct=round(ratio, 3),
        reduction_pct=round(100.0 - ratio, 3),
        median_block_encode_us=round(float(times_us.median()), 1) if len(times_us) else 0.0,
        p95_block_encode_us=round(float(times_us.quantile(0.95)), 1) if len(times_us) else 0.0,
        blocks=len(blocks),
    )
    logger.info("%s: %d -> %d bytes (%.2f%%)", label, original, compressed, ratio)
    return record


def run_bench(
    seed: int = 42,
    seconds: float = 10.0,
    sample_rate: int = 44100,
    block_size: int = 4096,
    amplitude: Optional[float] = None,
    frequency: float = 440.0,
    real_audio: Sequence[str] = (),
    parallel: bool = False,
) -> pd.DataFrame:
    records: List[BenchRecord] = []

    for label, kind in GENERATED_CONTENT:
        spec = GeneratorSpec(
            kind=kind,
            seconds=seconds,
            sample_rate=sample_rate,
            amplitude=None if kind == SignalKind.SILENCE else amplitude,
            frequency=frequency,
            seed=seed,
        )
        records.append(measure_content(label, generate(spec), sample_rate, block_size, parallel=parallel))

    for path in real_audio:
        meta, samples = read_wav(path)
        records.append(
            measure_content(Path(path).stem, samples, meta.sample_rate, block_size, meta.channels, parallel)
        )

    return pd.DataFrame([asdict(r) for r in records], columns=CSV_COLUMNS)


def summarize(df: pd.DataFrame, block_size: int, sample_rate: int, seed: int, seconds: float) -> Dict[str, Any]:
    """
    Run metadata plus the codec's aggregate comparison row: average ratio over
    the non-silence content, buffering latency and median per-block encode time.
    """
    varied = df[df["content"] != "silence"]
    return {
        "generated_at_utc": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "seconds": seconds,
        "sample_rate": sample_rate,
        "block_size": block_size,
        "buffering_latency_ms": buffering_latency_ms(block_size, sample_rate),
        "codec_row": {
            "avg_ratio_pct": round(float(varied["ratio_pct"].mean()), 3) if not varied.empty else None,
            "latency_ms": round(buffering_latency_ms(block_size, sample_rate), 2),
            "median_block_encode_us": round(float(df["median_block_encode_us"].median()), 1),
        },
        "rows": df.to_dict("records"),
    }


def summary_path_for(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return f"{stem}_summary.json"


def write_report(df: pd.DataFrame, summary: Dict[str, Any], csv_path: str) -> Tuple[str, str]:
    with atomic_output(csv_path, "w", newline="", encoding="utf-8") as f:
        df.to_csv(f, index=False)

    json_path = summary_path_for(csv_path)
    with atomic_output(json_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, default=_json_default)

    return csv_path, json_path


def _json_default(value: Any) -> Any:
    # numpy scalars from pandas rows
    if hasattr(value, "item"):
        return value.item()
    return str(value)
