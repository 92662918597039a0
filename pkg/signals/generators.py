from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from huffman.code_builder import pcm_to_symbols
from utils.errors import InvalidInputError


DEFAULT_SAMPLE_RATE = 44100
DEFAULT_TONE_FREQUENCY = 440.0
DEFAULT_TONE_AMPLITUDE = 0.8
DEFAULT_PINK_AMPLITUDE = 0.5
DEFAULT_SEED = 42

FULL_SCALE = 32767
PCM_MIN, PCM_MAX = -32768, 32767

# Voss-McCartney: 16 held rows plus one per-sample white source
PINK_ROWS = 16
PINK_SOURCES = PINK_ROWS + 1

# 64-bit LCG (Knuth MMIX constants)
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
LCG_MASK = (1 << 64) - 1


class SignalKind(str, Enum):
    SILENCE = "silence"
    TONE = "tone"
    PINK = "pink"


@dataclass(frozen=True)
class GeneratorSpec:
    kind: SignalKind
    seconds: float
    sample_rate: int = DEFAULT_SAMPLE_RATE
    amplitude: Optional[float] = None
    frequency: float = DEFAULT_TONE_FREQUENCY
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SignalKind(self.kind))
        if not self.seconds > 0:
            raise InvalidInputError(f"seconds must be > 0, got {self.seconds}.")
        if self.sample_rate < 1:
            raise InvalidInputError(f"sample_rate must be >= 1, got {self.sample_rate}.")
        if self.amplitude is not None and not 0 < self.amplitude <= 1:
            raise InvalidInputError(f"amplitude must be in (0, 1], got {self.amplitude}.")
        if self.kind == SignalKind.TONE and not 0 < self.frequency < self.sample_rate / 2:
            raise InvalidInputError(
                f"Tone frequency {self.frequency} Hz must lie in (0, {self.sample_rate / 2}) Hz (Nyquist)."
            )

    @property
    def num_samples(self) -> int:
        return int(round(self.seconds * self.sample_rate))

    @property
    def effective_amplitude(self) -> float:
        if self.amplitude is not None:
            return self.amplitude
        return DEFAULT_PINK_AMPLITUDE if self.kind == SignalKind.PINK else DEFAULT_TONE_AMPLITUDE


def _to_symbols(values: np.ndarray) -> np.ndarray:
    return pcm_to_symbols(np.clip(np.rint(values), PCM_MIN, PCM_MAX).astype(np.int16))


def gen_silence(spec: GeneratorSpec) -> np.ndarray:
    return np.zeros(spec.num_samples, dtype=np.uint16)


def gen_tone(spec: GeneratorSpec) -> np.ndarray:
    if not 0 < spec.frequency < spec.sample_rate / 2:
        raise InvalidInputError(f"Tone frequency {spec.frequency} Hz violates Nyquist for {spec.sample_rate} Hz.")
    i = np.arange(spec.num_samples, dtype=np.float64)
    wave = np.sin(2.0 * np.pi * spec.frequency * i / spec.sample_rate)
    return _to_symbols(spec.effective_amplitude * FULL_SCALE * wave)


def gen_pink(spec: GeneratorSpec) -> np.ndarray:
    """
    Voss-McCartney pink noise. Row r is redrawn at sample i (i >= 1) when r is
    the number of trailing zero bits of i+1. Each draw keeps the top 32 bits u
    of the LCG state; the source value is u / 2**31 - 1, so sums stay exact
    as integers until the final scaling.
    """
    n = spec.num_samples
    state = spec.seed & LCG_MASK

    def draw() -> int:
        nonlocal state
        state = (state * LCG_MULTIPLIER + LCG_INCREMENT) & LCG_MASK
        return state >> 32

    rows = [draw() for _ in range(PINK_ROWS)]
    row_total = sum(rows)
    totals = np.empty(n, dtype=np.int64)

    for i in range(n):
        if i:
            k = i + 1
            r = (k & -k).bit_length() - 1
            if r < PINK_ROWS:
                fresh = draw()
                row_total += fresh - rows[r]
                rows[r] = fresh
        totals[i] = row_total + draw()

    mean = (totals / float(1 << 31) - PINK_SOURCES) / PINK_SOURCES
    return _to_symbols(mean * spec.effective_amplitude * FULL_SCALE)


_GENERATORS = {
    SignalKind.SILENCE: gen_silence,
    SignalKind.TONE: gen_tone,
    SignalKind.PINK: gen_pink,
}


def generate(spec: GeneratorSpec) -> np.ndarray:
    return _GENERATORS[spec.kind](spec)
