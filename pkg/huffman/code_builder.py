from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from utils.errors import InternalConsistencyError, InvalidInputError


ALPHABET_SIZE = 1 << 16
MAX_BLOCK_SAMPLES = 65536
MAX_CODE_LENGTH = 31

# Internal tree nodes rank after every leaf symbol.
INTERNAL_RANK_BASE = ALPHABET_SIZE


# =========================
# SYMBOL MAPPING
# =========================
def pcm_to_symbols(pcm: Sequence[int]) -> np.ndarray:
    """
    Signed 16-bit PCM -> unsigned 16-bit symbols (two's-complement bit pattern).
    """
    arr = np.asarray(pcm)
    if arr.dtype == np.int16:
        return arr.view(np.uint16)
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < -32768 or arr.max() > 32767):
        raise InvalidInputError("PCM samples must lie in [-32768, 32767].")
    return arr.astype(np.int16).view(np.uint16)


def as_symbols(values: Sequence[int]) -> np.ndarray:
    """
    Validate and convert any integer sequence to a uint16 symbol array.
    """
    arr = np.asarray(values)
    if arr.dtype == np.uint16:
        return arr.reshape(-1)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint16)
    if not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInputError(f"Symbols must be integers, got dtype {arr.dtype}.")
    arr = arr.astype(np.int64).reshape(-1)
    if arr.min() < 0 or arr.max() >= ALPHABET_SIZE:
        raise InvalidInputError("Symbols must lie in [0, 65535].")
    return arr.astype(np.uint16)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# =========================
# TABLES
# =========================
@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """
    Per-block symbol counts. `symbols` is strictly increasing, every count >= 1.
    """

    symbols: np.ndarray
    counts: np.ndarray
    total: int

    def __len__(self) -> int:
        return int(self.symbols.size)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.symbols.tolist(), self.counts.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return (
            self.total == other.total
            and np.array_equal(self.symbols, other.symbols)
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True, eq=False)
class CodeLengthTable:
    """
    Code length per distinct symbol, symbols strictly increasing.
    """

    symbols: np.ndarray
    lengths: np.ndarray

    def __len__(self) -> int:
        return int(self.symbols.size)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.symbols.tolist(), self.lengths.tolist()))

    def pairs(self) -> List[Tuple[int, int]]:
        return list(zip(self.symbols.tolist(), self.lengths.tolist()))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, int]]) -> "CodeLengthTable":
        ordered = sorted((int(s), int(l)) for s, l in pairs)
        symbols = np.array([s for s, _ in ordered], dtype=np.int64)
        lengths = np.array([l for _, l in ordered], dtype=np.int64)
        return cls(symbols=_frozen(symbols), lengths=_frozen(lengths))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodeLengthTable):
            return NotImplemented
        return np.array_equal(self.symbols, other.symbols) and np.array_equal(self.lengths, other.lengths)


@dataclass(frozen=True, eq=False)
class CanonicalCodebook:
    """
    Entries in canonical order: by (length, symbol). Codes are MSB-first.
    """

    symbols: np.ndarray
    lengths: np.ndarray
    codes: np.ndarray

    def __len__(self) -> int:
        return int(self.symbols.size)

    def entries(self) -> Iterator[Tuple[int, int, int]]:
        return zip(self.symbols.tolist(), self.lengths.tolist(), self.codes.tolist())

    def as_dict(self) -> Dict[int, Tuple[int, int]]:
        """symbol -> (length, code)"""
        return {s: (l, c) for s, l, c in self.entries()}

    def codeword(self, symbol: int) -> str:
        length, code = self.as_dict()[symbol]
        return format(code, f"0{length}b")

    def lengths_table(self) -> CodeLengthTable:
        return CodeLengthTable.from_pairs(list(zip(self.symbols.tolist(), self.lengths.tolist())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CanonicalCodebook):
            return NotImplemented
        return (
            np.array_equal(self.symbols, other.symbols)
            and np.array_equal(self.lengths, other.lengths)
            and np.array_equal(self.codes, other.codes)
        )


# =========================
# FREQUENCY ANALYZER
# =========================
def compute_frequencies(block: Sequence[int]) -> FrequencyTable:
    symbols = as_symbols(block)
    n = int(symbols.size)
    if n == 0:
        raise InvalidInputError("Cannot compute frequencies of an empty block.")
    if n > MAX_BLOCK_SAMPLES:
        raise InvalidInputError(f"Block holds {n} samples; at most {MAX_BLOCK_SAMPLES} are allowed.")

    counts = np.bincount(symbols, minlength=ALPHABET_SIZE)
    present = np.flatnonzero(counts)
    return FrequencyTable(
        symbols=_frozen(present.astype(np.int64)),
        counts=_frozen(counts[present].astype(np.int64)),
        total=n,
    )


def block_entropy(freq: FrequencyTable) -> float:
    """
    Empirical entropy in bits per sample.
    """
    p = freq.counts / float(freq.total)
    return abs(float((p * np.log2(p)).sum()))


# =========================
# TREE CONSTRUCTOR
# =========================
def _merge_parents(leaf_weights: List[int]) -> List[int]:
    """
    Two-queue Huffman merge over leaves sorted by (weight, symbol). Node ids:
    leaves 0..k-1, internal nodes k..2k-2 in creation order; returns parent ids.

    Runs of equal-weight nodes at the front of a queue pair off among
    themselves before anything else is touched, so they are merged in bulk.
    """
    k = len(leaf_weights)
    parent = [0] * (2 * k - 1)
    internal: List[int] = []
    i = j = 0
    node = k
    last = 2 * k - 1

    while node < last:
        made = node - k
        if i < k and (j == made or leaf_weights[i] <= internal[j]):
            w = leaf_weights[i]
            pairs = (bisect_right(leaf_weights, w, i) - i) // 2
            if pairs:
                ids = range(node, node + pairs)
                parent[i : i + 2 * pairs : 2] = ids
                parent[i + 1 : i + 2 * pairs : 2] = ids
                internal.extend([2 * w] * pairs)
                i += 2 * pairs
                node += pairs
                continue
        else:
            w = internal[j]
            pairs = (bisect_right(internal, w, j, made) - j) // 2
            # leaves win ties, so internal pairs only while strictly lighter
            if pairs and (i == k or w < leaf_weights[i]):
                ids = range(node, node + pairs)
                parent[k + j : k + j + 2 * pairs : 2] = ids
                parent[k + j + 1 : k + j + 2 * pairs : 2] = ids
                internal.extend([2 * w] * pairs)
                j += 2 * pairs
                node += pairs
                continue

        if i < k and (j == made or leaf_weights[i] <= internal[j]):
            a, wa = i, leaf_weights[i]
            i += 1
        else:
            a, wa = k + j, internal[j]
            j += 1
        if i < k and (j == made or leaf_weights[i] <= internal[j]):
            b, wb = i, leaf_weights[i]
            i += 1
        else:
            b, wb = k + j, internal[j]
            j += 1
        parent[a] = node
        parent[b] = node
        internal.append(wa + wb)
        node += 1

    return parent


def _node_depths(parent: List[int]) -> np.ndarray:
    # pointer jumping: dist[v] is the edge count from v up to up[v]
    up = np.array(parent, dtype=np.int64)
    root = up.size - 1
    up[root] = root
    dist = np.ones(up.size, dtype=np.int64)
    dist[root] = 0
    while (up != root).any():
        dist = dist + dist[up]
        up = up[up]
    return dist


def build_code_lengths(freq: FrequencyTable) -> CodeLengthTable:
    """
    Optimal Huffman code lengths for `freq`.

    Nodes are merged smallest-first by (weight, rank): a leaf ranks by its
    symbol value, an internal node by INTERNAL_RANK_BASE + creation order.
    Merged nodes come out in non-decreasing weight and increasing rank, so a
    sorted leaf queue plus a FIFO of internal nodes gives the same order as a
    priority queue.
    """
    k = len(freq)
    if k == 1:
        return CodeLengthTable(symbols=freq.symbols, lengths=_frozen(np.ones(1, dtype=np.int64)))

    order = np.lexsort((freq.symbols, freq.counts))
    depth = _node_depths(_merge_parents(freq.counts[order].tolist()))

    lengths = np.empty(k, dtype=np.int64)
    lengths[order] = depth[:k]

    longest = int(lengths.max())
    if longest > MAX_CODE_LENGTH:
        raise InternalConsistencyError(f"Huffman depth {longest} exceeds {MAX_CODE_LENGTH} bits.")

    return CodeLengthTable(symbols=freq.symbols, lengths=_frozen(lengths))


# =========================
# CANONICAL ENCODER
# =========================
def kraft_numerator(lengths: Sequence[int], width: int = MAX_CODE_LENGTH + 1) -> int:
    """
    Kraft sum scaled by 2**width (exact integer arithmetic).
    """
    return sum(1 << (width - int(l)) for l in lengths)


def kraft_is_valid(lengths: Sequence[int]) -> bool:
    """
    Complete code (sum == 1), or a single symbol of length 1 (sum == 1/2).
    """
    lengths = [int(l) for l in lengths]
    if not lengths or any(l < 1 or l > MAX_CODE_LENGTH for l in lengths):
        return False
    full = 1 << (MAX_CODE_LENGTH + 1)
    total = kraft_numerator(lengths)
    if len(lengths) == 1:
        return total == full // 2
    return total == full


def assign_canonical_codes(lengths: CodeLengthTable) -> CanonicalCodebook:
    if not kraft_is_valid(lengths.lengths.tolist()):
        raise InternalConsistencyError("Code lengths violate the Kraft equality; no canonical code exists.")

    order = np.lexsort((lengths.symbols, lengths.lengths))
    sym = lengths.symbols[order]
    lens = lengths.lengths[order]

    # code_i = (code_{i-1} + 1) << (len_i - len_{i-1}), i.e. the running
    # Kraft sum left-aligned to the longest length, shifted back down.
    width = int(lens[-1])
    steps = np.left_shift(np.int64(1), width - lens)
    starts = np.concatenate(([0], np.cumsum(steps)[:-1])).astype(np.int64)
    codes = np.right_shift(starts, width - lens)

    return CanonicalCodebook(
        symbols=_frozen(sym.astype(np.int64)),
        lengths=_frozen(lens.astype(np.int64)),
        codes=_frozen(codes.astype(np.int64)),
    )


def is_prefix_free(codebook: CanonicalCodebook) -> bool:
    words = sorted(format(c, f"0{l}b") for _, l, c in codebook.entries())
    # a prefix sorts immediately before one of its extensions
    return all(not b.startswith(a) for a, b in zip(words, words[1:]))
