from __future__ import annotations

from typing import Optional


class ObhsError(Exception):
    """Base class for every error raised by the codec."""


class InvalidInputError(ObhsError, ValueError):
    pass


class UnsupportedFormatError(ObhsError, ValueError):
    pass


class CorruptStreamError(ObhsError, ValueError):
    """
    Malformed .obhs data. `offset` is the byte offset where the problem was
    detected; `block_index` is filled in by the stream reader.
    """

    def __init__(self, detail: str, offset: Optional[int] = None, block_index: Optional[int] = None):
        self.detail = detail
        self.offset = offset
        self.block_index = block_index
        super().__init__(self._format())

    def _format(self) -> str:
        parts = []
        if self.block_index is not None:
            parts.append(f"block {self.block_index}")
        if self.offset is not None:
            parts.append(f"byte offset {self.offset}")
        where = f" ({', '.join(parts)})" if parts else ""
        return f"{self.detail}{where}"

    def at_block(self, block_index: int) -> "CorruptStreamError":
        return CorruptStreamError(self.detail, offset=self.offset, block_index=block_index)


class InternalConsistencyError(ObhsError, RuntimeError):
    pass


class VerificationError(ObhsError, RuntimeError):
    pass
