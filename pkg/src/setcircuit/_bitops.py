"""Bitmask helpers shared by the exact and the bounded tiers.

A set of numbers below ``n`` is a Python int whose bit ``i`` is membership of ``i``.
"""

from __future__ import annotations

import math

import numpy as np

# below this many set bits in the sparser operand, shift-or beats FFT
_SHIFT_OR_LIMIT = 1024


def low_mask(n: int) -> int:
    return (1 << n) - 1 if n > 0 else 0


def repeat(word: int, length: int, count: int) -> int:
    """Concatenate ``count`` copies of a ``length``-bit word."""
    if count <= 0:
        return 0
    out, have = word & low_mask(length), 1
    # doubling keeps this linear in the output size
    while have * 2 <= count:
        out |= out << (have * length)
        have *= 2
    if have < count:
        out |= repeat(word, length, count - have) << (have * length)
    return out


def rotate(word: int, shift: int, length: int) -> int:
    """Word whose bit i is bit (i + shift) mod length of ``word``."""
    shift %= length
    if shift == 0:
        return word
    return ((word >> shift) | (word << (length - shift))) & low_mask(length)


def to_array(x: int, n: int) -> np.ndarray:
    if n <= 0:
        return np.zeros(0, dtype=bool)
    raw = (x & low_mask(n)).to_bytes((n + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:n].astype(bool)


def from_array(bits: np.ndarray) -> int:
    if bits.size == 0:
        return 0
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def indices(x: int, n: int) -> np.ndarray:
    return np.flatnonzero(to_array(x, n))


def lowest(x: int) -> int:
    return (x & -x).bit_length() - 1


def iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def sum_masks(a: int, b: int, n: int) -> int:
    """Bitmask of {i + j < n : i in a, j in b}."""
    m = low_mask(n)
    a &= m
    b &= m
    if not a or not b:
        return 0
    if a.bit_count() > b.bit_count():
        a, b = b, a
    if a.bit_count() <= _SHIFT_OR_LIMIT:
        out = 0
        for i in indices(a, n).tolist():
            out |= b << i
        return out & m
    fa = to_array(a, n).astype(np.float64)
    fb = to_array(b, n).astype(np.float64)
    size = 1 << (2 * n - 1).bit_length()
    conv = np.fft.irfft(np.fft.rfft(fa, size) * np.fft.rfft(fb, size), size)[:n]
    return from_array(conv > 0.5)


def product_masks(a: int, b: int, n: int) -> int:
    """Bitmask of {i * j < n : i in a, j in b, i >= 1, j >= 1}."""
    m = low_mask(n)
    a &= m & ~1
    b &= m & ~1
    if not a or not b:
        return 0
    ia = indices(a, n)
    ib = indices(b, n)
    top = n - 1
    out = np.zeros(n, dtype=bool)

    def mark(outer, inner) -> None:
        for i in outer.tolist():
            k = int(np.searchsorted(inner, top // i, "right"))
            if k:
                out[i * inner[:k]] = True

    # one side may be short enough to loop over in full
    steps_a = int(np.searchsorted(ia, top // int(ib[0]), "right"))
    steps_b = int(np.searchsorted(ib, top // int(ia[0]), "right"))
    root = math.isqrt(top)
    small_a = int(np.searchsorted(ia, root, "right"))
    small_b = int(np.searchsorted(ib, root, "right"))
    if min(steps_a, steps_b) <= small_a + small_b:
        if steps_a <= steps_b:
            mark(ia[:steps_a], ib)
        else:
            mark(ib[:steps_b], ia)
    else:
        # every product below n has a factor at most isqrt(n - 1)
        mark(ia[:small_a], ib)
        mark(ib[:small_b], ia)
    return from_array(out)
