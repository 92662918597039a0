from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from container.layout import MAX_BLOCK_SIZE, MIN_BLOCK_SIZE


DEFAULT_BLOCK_SIZE = 4096
DEFAULT_SEED = 42
DEFAULT_SECONDS = 10.0
DEFAULT_SAMPLE_RATE = 44100
DEFAULT_ARTIFACTS_DIR = "artifacts"
DEFAULT_LOG_LEVEL = "WARNING"


@dataclass(frozen=True)
class Settings:
    block_size: int = DEFAULT_BLOCK_SIZE
    seed: int = DEFAULT_SEED
    seconds: float = DEFAULT_SECONDS
    sample_rate: int = DEFAULT_SAMPLE_RATE
    artifacts_dir: str = DEFAULT_ARTIFACTS_DIR
    log_level: str = DEFAULT_LOG_LEVEL


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}. Check your .env file.")


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be a number, got {raw!r}. Check your .env file.")


def load_settings() -> Settings:
    """
    Read OBHS_* settings from the environment (and .env, if present).
    """
    load_dotenv()

    block_size = _int_env("OBHS_BLOCK_SIZE", DEFAULT_BLOCK_SIZE)
    if not MIN_BLOCK_SIZE <= block_size <= MAX_BLOCK_SIZE:
        raise RuntimeError(
            f"OBHS_BLOCK_SIZE must be in [{MIN_BLOCK_SIZE}, {MAX_BLOCK_SIZE}], got {block_size}."
        )

    sample_rate = _int_env("OBHS_SAMPLE_RATE", DEFAULT_SAMPLE_RATE)
    if sample_rate <= 0:
        raise RuntimeError(f"OBHS_SAMPLE_RATE must be positive, got {sample_rate}.")

    return Settings(
        block_size=block_size,
        seed=_int_env("OBHS_SEED", DEFAULT_SEED),
        seconds=_float_env("OBHS_SECONDS", DEFAULT_SECONDS),
        sample_rate=sample_rate,
        artifacts_dir=os.getenv("OBHS_ARTIFACTS_DIR") or DEFAULT_ARTIFACTS_DIR,
        log_level=(os.getenv("OBHS_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper(),
    )
