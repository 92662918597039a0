from __future__ import annotations

import heapq
import itertools
from collections import Counter

import numpy as np
import pytest

from huffman.code_builder import (
    INTERNAL_RANK_BASE,
    CodeLengthTable,
    assign_canonical_codes,
    block_entropy,
    build_code_lengths,
    compute_frequencies,
    is_prefix_free,
    kraft_is_valid,
    pcm_to_symbols,
)
from signals.generators import GeneratorSpec, SignalKind, generate
from utils.errors import InternalConsistencyError, InvalidInputError


A, B, C, D = 10, 20, 30, 40


def _block_from_counts(counts: dict) -> list:
    return [s for s, c in counts.items() for _ in range(c)]


def _cost(freq, lengths) -> int:
    f = freq.as_dict()
    return sum(f[s] * l for s, l in lengths.as_dict().items())


def _brute_force_min_cost(counts: list) -> int:
    """Cheapest Kraft-feasible length vector; shortest lengths go to the largest counts."""
    k = len(counts)
    if k == 1:
        return counts[0]
    desc = sorted(counts, reverse=True)
    best = None
    for lens in itertools.combinations_with_replacement(range(1, k), k):
        if sum(1 << (k - l) for l in lens) > 1 << k:
            continue
        cost = sum(c * l for c, l in zip(desc, lens))
        if best is None or cost < best:
            best = cost
    return best


# =========================
# compute_frequencies
# =========================
def test_frequencies_constant_block():
    freq = compute_frequencies([0, 0, 0, 0])
    assert freq.as_dict() == {0: 4}
    assert freq.total == 4


def test_frequencies_direct_count():
    freq = compute_frequencies([1, 1, 2, 3])
    assert freq.as_dict() == {1: 2, 2: 1, 3: 1}
    assert freq.total == 4


def test_frequencies_silence_block():
    freq = compute_frequencies(np.zeros(4096, dtype=np.uint16))
    assert freq.as_dict() == {0: 4096}
    assert freq.total == 4096


def test_frequencies_invariants_on_random_block():
    rng = np.random.default_rng(7)
    block = rng.integers(0, 300, size=1000)
    freq = compute_frequencies(block)
    assert int(freq.counts.sum()) == freq.total == 1000
    assert (freq.counts >= 1).all()
    assert list(freq.symbols) == sorted(set(block.tolist()))


def test_frequencies_reject_empty_and_oversized():
    with pytest.raises(InvalidInputError):
        compute_frequencies([])
    with pytest.raises(InvalidInputError):
        compute_frequencies(np.zeros(65537, dtype=np.uint16))
    with pytest.raises(InvalidInputError):
        compute_frequencies([65536])


def test_pcm_symbol_reinterpretation():
    symbols = pcm_to_symbols([0, -1, 32767, -32768])
    assert symbols.tolist() == [0, 65535, 32767, 32768]
    assert symbols.view(np.int16).tolist() == [0, -1, 32767, -32768]


# =========================
# build_code_lengths
# =========================
def test_code_lengths_textbook_example():
    freq = compute_frequencies(_block_from_counts({A: 5, B: 2, C: 1, D: 1}))
    lengths = build_code_lengths(freq)
    assert lengths.as_dict() == {A: 1, B: 2, C: 3, D: 3}
    assert _cost(freq, lengths) == 15


def test_code_lengths_single_symbol_gets_one_bit():
    lengths = build_code_lengths(compute_frequencies([0] * 4096))
    assert lengths.as_dict() == {0: 1}


def test_code_lengths_balanced_tree():
    lengths = build_code_lengths(compute_frequencies([1, 2, 3, 4]))
    assert lengths.as_dict() == {1: 2, 2: 2, 3: 2, 4: 2}


def test_code_lengths_are_optimal_against_brute_force():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        k = int(rng.integers(1, 9))
        symbols = rng.choice(65536, size=k, replace=False)
        counts = rng.integers(1, 33, size=k)
        block = np.repeat(symbols, counts)
        freq = compute_frequencies(block)
        lengths = build_code_lengths(freq)

        assert kraft_is_valid(lengths.lengths.tolist())
        assert _cost(freq, lengths) == _brute_force_min_cost(counts.tolist())


def test_entropy_sandwich():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 1000:
        alphabet = int(rng.integers(2, 64))
        n = int(rng.integers(2, 600))
        weights = rng.random(alphabet) ** 3 + 1e-3
        block = rng.choice(alphabet, size=n, p=weights / weights.sum())
        freq = compute_frequencies(block)
        if len(freq) < 2:
            continue
        lengths = build_code_lengths(freq)
        mean_length = _cost(freq, lengths) / freq.total
        h = block_entropy(freq)
        assert h - 1e-9 <= mean_length < h + 1
        checked += 1


def test_code_lengths_deterministic():
    rng = np.random.default_rng(5)
    block = rng.integers(0, 50, size=2000)
    first = build_code_lengths(compute_frequencies(block))
    second = build_code_lengths(compute_frequencies(block.copy()))
    assert first == second


def _priority_queue_lengths(freq) -> dict:
    """Reference merge: pop the two smallest (weight, rank) entries from a heap."""
    heap = [(int(c), int(s), int(s)) for s, c in zip(freq.symbols, freq.counts)]
    heapq.heapify(heap)
    if len(heap) == 1:
        return {heap[0][2]: 1}

    children = {}
    created = 0
    while len(heap) > 1:
        wa, _, a = heapq.heappop(heap)
        wb, _, b = heapq.heappop(heap)
        node = INTERNAL_RANK_BASE + created
        children[node] = (a, b)
        heapq.heappush(heap, (wa + wb, node, node))
        created += 1

    depths = {}
    stack = [(heap[0][2], 0)]
    while stack:
        node, depth = stack.pop()
        if node in children:
            stack.extend((child, depth + 1) for child in children[node])
        else:
            depths[node] = depth
    return depths


def test_code_lengths_match_priority_queue_on_ties():
    rng = np.random.default_rng(31)
    for _ in range(200):
        k = int(rng.integers(1, 3500))
        symbols = rng.choice(65536, size=k, replace=False)
        counts = rng.integers(1, int(rng.choice([2, 3, 5, 40])), size=k)
        freq = compute_frequencies(np.repeat(symbols, counts))
        assert build_code_lengths(freq).as_dict() == _priority_queue_lengths(freq)


def test_code_lengths_match_priority_queue_on_audio():
    pink = generate(GeneratorSpec(kind=SignalKind.PINK, seconds=0.5))
    for start in range(0, pink.size - 4096, 4096):
        freq = compute_frequencies(pink[start : start + 4096])
        assert build_code_lengths(freq).as_dict() == _priority_queue_lengths(freq)


def test_code_lengths_uniform_large_alphabet():
    freq = compute_frequencies(np.arange(3000, dtype=np.uint16))
    lengths = build_code_lengths(freq)
    assert Counter(lengths.lengths.tolist()) == {11: 1096, 12: 1904}
    assert kraft_is_valid(lengths.lengths.tolist())


# =========================
# assign_canonical_codes
# =========================
def test_canonical_codes_three_symbols():
    book = assign_canonical_codes(CodeLengthTable.from_pairs([(1, 1), (2, 2), (3, 2)]))
    assert [book.codeword(s) for s in (1, 2, 3)] == ["0", "10", "11"]


def test_canonical_codes_single_entry():
    book = assign_canonical_codes(CodeLengthTable.from_pairs([(7, 1)]))
    assert book.as_dict() == {7: (1, 0)}


def test_canonical_codes_four_symbols():
    book = assign_canonical_codes(CodeLengthTable.from_pairs([(A, 1), (B, 2), (C, 3), (D, 3)]))
    assert [book.codeword(s) for s in (A, B, C, D)] == ["0", "10", "110", "111"]
    assert is_prefix_free(book)


def test_canonical_order_breaks_length_ties_by_symbol():
    book = assign_canonical_codes(CodeLengthTable.from_pairs([(9, 2), (3, 2), (5, 2), (1, 2)]))
    assert [book.codeword(s) for s in (1, 3, 5, 9)] == ["00", "01", "10", "11"]


def test_canonical_codes_reject_kraft_violation():
    with pytest.raises(InternalConsistencyError):
        assign_canonical_codes(CodeLengthTable.from_pairs([(1, 1), (2, 1), (3, 1)]))
    with pytest.raises(InternalConsistencyError):
        assign_canonical_codes(CodeLengthTable.from_pairs([(1, 2), (2, 2)]))


def test_canonical_properties_on_random_blocks():
    rng = np.random.default_rng(2024)
    for _ in range(300):
        spread = int(rng.integers(1, 2000))
        n = int(rng.integers(1, 4097))
        block = np.clip(rng.normal(0, spread, size=n).round(), -32768, 32767).astype(np.int16).view(np.uint16)
        lengths = build_code_lengths(compute_frequencies(block))
        book = assign_canonical_codes(lengths)

        assert is_prefix_free(book)
        # rebuilt from (symbol, length) pairs alone
        assert assign_canonical_codes(book.lengths_table()) == book

        width = int(book.lengths.max())
        aligned = (book.codes << (width - book.lengths)).tolist()
        assert aligned == sorted(aligned) and len(set(aligned)) == len(aligned)
        assert int(book.codes[0]) == 0
