from __future__ import annotations

import logging
import os

from dotenv import load_dotenv


_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_ROOT = "obhs"


def _configure_root() -> logging.Logger:
    root = logging.getLogger(_ROOT)
    if root.handlers:
        return root

    load_dotenv()
    level = (os.getenv("OBHS_LOG_LEVEL") or "WARNING").upper()

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level, logging.WARNING))
    root.propagate = False
    return root


def get_logger(name: str) -> logging.Logger:
    """
    Child of the shared "obhs" logger, e.g. get_logger(__name__).
    """
    _configure_root()
    return logging.getLogger(f"{_ROOT}.{name}")


def set_level(level: str) -> None:
    _configure_root().setLevel(getattr(logging, level.upper(), logging.WARNING))
