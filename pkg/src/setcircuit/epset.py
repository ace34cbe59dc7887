"""Exact eventually-periodic subsets of the natural numbers.

An :class:`EpSet` is stored as a threshold ``T``, a ``T``-bit prefix, and an
``L``-bit repeating word that governs every ``n >= T``.  Both bit sequences are
Python ints (bit ``i`` set means member), so Boolean algebra is word-parallel.
Construction always canonicalizes, which makes ``==`` coincide with set
equality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable

from ._bitops import iter_bits, low_mask, lowest, repeat, rotate, sum_masks

# Largest threshold + period the exact tier will build before giving up.
EXACT_LIMIT = 1 << 22


class EpSetError(ValueError):
    """Malformed eventually-periodic data."""


class ExactTierLimit(ArithmeticError):
    """The exact result exists but is too large to materialize."""


class CertificateError(RuntimeError):
    """A sumset periodicity certificate failed."""


class InfiniteProductError(ValueError):
    """Productset of two infinite operands requested from the exact tier."""


class GateKind(enum.Enum):
    MAX = "max"
    MIN = "min"
    CARD = "card"
    EPSILON = "eps"
    FIN = "fin"
    DOWN = "down"
    BELOW = "below"
    SHOVE = "shove"
    SUM = "sum"
    PROD = "prod"
    DISCRIMINATOR = "disc"
    FMINUS1 = "fminus1"
    MAXMINUS1 = "maxminus1"

    @classmethod
    def from_name(cls, name: str) -> GateKind:
        try:
            return cls(name)
        except ValueError:
            raise KeyError(name) from None


PREDICATE_GATES = frozenset({GateKind.EPSILON, GateKind.FIN})


def _check_size(threshold: int, period: int) -> None:
    if threshold + period > EXACT_LIMIT:
        raise ExactTierLimit(f"exact representation needs {threshold + period} bits")


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


@dataclass(frozen=True)
class EpSet:
    """Canonical eventually-periodic set.

    ``prefix`` bit ``n`` (``n < threshold``) is membership of ``n``;
    ``word`` bit ``i`` (``i < period``) is membership of every
    ``n >= threshold`` with ``(n - threshold) % period == i``.
    """

    threshold: int
    prefix: int
    period: int
    word: int

    def __post_init__(self) -> None:
        t, prefix, length, word = _canonical(self.threshold, self.prefix, self.period, self.word)
        object.__setattr__(self, "threshold", t)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", length)
        object.__setattr__(self, "word", word)

    # constructors

    @classmethod
    def empty(cls) -> EpSet:
        return cls(0, 0, 1, 0)

    @classmethod
    def naturals(cls) -> EpSet:
        return cls(0, 0, 1, 1)

    @classmethod
    def singleton(cls, n: int) -> EpSet:
        if n < 0:
            raise EpSetError("members must be natural numbers")
        _check_size(n + 1, 1)
        return cls(n + 1, 1 << n, 1, 0)

    @classmethod
    def finite(cls, members: Iterable[int]) -> EpSet:
        bits = 0
        for n in members:
            if n < 0:
                raise EpSetError("members must be natural numbers")
            bits |= 1 << n
        return cls(bits.bit_length(), bits, 1, 0)

    @classmethod
    def interval(cls, lo: int, hi: int) -> EpSet:
        """The set {lo, ..., hi}; empty when hi < lo."""
        if hi < lo:
            return cls.empty()
        _check_size(hi + 1, 1)
        return cls(hi + 1, low_mask(hi + 1) & ~low_mask(lo), 1, 0)

    @classmethod
    def residue(cls, modulus: int, rem: int) -> EpSet:
        """All n with n = rem (mod modulus), n >= 0."""
        if modulus < 1:
            raise EpSetError("modulus must be positive")
        if rem < 0:
            raise EpSetError("residue must be a natural number")
        return cls(0, 0, modulus, 1 << (rem % modulus))

    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], threshold: int, period: int) -> EpSet:
        prefix = sum(1 << n for n in range(threshold) if pred(n))
        word = sum(1 << i for i in range(period) if pred(threshold + i))
        return cls(threshold, prefix, period, word)

    @classmethod
    def parse(cls, text: str) -> EpSet:
        """Read the literal form ``ep[<prefix bits>;<word bits>]``."""
        s = text.strip()
        if not (s.startswith("ep[") and s.endswith("]")):
            raise EpSetError(f"not an EP literal: {text!r}")
        body = s[3:-1]
        if body.count(";") != 1:
            raise EpSetError(f"EP literal needs exactly one ';': {text!r}")
        pre, word = body.split(";")
        if not word:
            raise EpSetError("EP literal has an empty period word")
        if set(pre + word) - {"0", "1"}:
            raise EpSetError(f"EP literal bits must be 0 or 1: {text!r}")
        return cls(len(pre), _bits_from_str(pre), len(word), _bits_from_str(word))

    # views

    def __str__(self) -> str:
        return f"ep[{_bits_to_str(self.prefix, self.threshold)};{_bits_to_str(self.word, self.period)}]"

    def __contains__(self, n: int) -> bool:
        return self.member(n)

    def member(self, n: int) -> bool:
        if n < 0:
            return False
        if n < self.threshold:
            return bool(self.prefix >> n & 1)
        return bool(self.word >> ((n - self.threshold) % self.period) & 1)

    def bits(self, n: int) -> int:
        """Membership bitmask of [0, n)."""
        if n <= self.threshold:
            return self.prefix & low_mask(n)
        tail_len = n - self.threshold
        tail = repeat(self.word, self.period, -(-tail_len // self.period)) & low_mask(tail_len)
        return self.prefix | tail << self.threshold

    def word_at(self, start: int, length: int) -> int:
        """Membership bitmask of [start, start + length) when start >= threshold and
        ``length`` is a multiple of the period."""
        shifted = rotate(self.word, start - self.threshold, self.period)
        return repeat(shifted, self.period, length // self.period)

    def members(self, upto: int) -> list[int]:
        """Members n with n <= upto, ascending."""
        return list(iter_bits(self.bits(upto + 1)))

    @property
    def is_empty(self) -> bool:
        return self.prefix == 0 and self.word == 0

    @property
    def is_finite(self) -> bool:
        return self.word == 0

    @property
    def is_cofinite(self) -> bool:
        return self.word == low_mask(self.period)

    def min(self) -> int | None:
        if self.prefix:
            return lowest(self.prefix)
        if self.word:
            return self.threshold + lowest(self.word)
        return None

    def max(self) -> int | None:
        if self.word or not self.prefix:
            return None
        return self.prefix.bit_length() - 1

    def card(self) -> int | None:
        if self.word:
            return None
        return self.prefix.bit_count()


def _bits_from_str(s: str) -> int:
    return int(s[::-1], 2) if s else 0


def _bits_to_str(x: int, n: int) -> str:
    return format(x, f"0{n}b")[::-1] if n else ""


def _canonical(t: int, prefix: int, length: int, word: int) -> tuple[int, int, int, int]:
    if length < 1:
        raise EpSetError("period word must be non-empty")
    if t < 0:
        raise EpSetError("threshold must be non-negative")
    prefix &= low_mask(t)
    word &= low_mask(length)

    for d in _divisors(length):
        # d-periodic iff shifting by d leaves the overlap unchanged
        if d == length or word >> d == word & low_mask(length - d):
            length, word = d, word & low_mask(d)
            break

    if t:
        # extend the periodic part backwards over the prefix; the highest
        # disagreement marks the least possible threshold
        back = repeat(rotate(word, -t, length), length, -(-t // length)) & low_mask(t)
        new_t = (prefix ^ back).bit_length()
        if new_t < t:
            word = rotate(word, new_t - t, length)
            prefix &= low_mask(new_t)
            t = new_t
    return t, prefix, length, word


def restrict(s: EpSet, m: int) -> EpSet:
    """Members of ``s`` that are at most ``m``."""
    if m < 0:
        return EpSet.empty()
    return EpSet(m + 1, s.bits(m + 1), 1, 0)


def _align(s: EpSet, t: EpSet) -> tuple[int, int, tuple[int, int], tuple[int, int]]:
    threshold = max(s.threshold, t.threshold)
    period = math.lcm(s.period, t.period)
    _check_size(threshold, period)
    return (
        threshold,
        period,
        (s.bits(threshold), s.word_at(threshold, period)),
        (t.bits(threshold), t.word_at(threshold, period)),
    )


def complement(s: EpSet) -> EpSet:
    return EpSet(s.threshold, ~s.prefix, s.period, ~s.word)


def union(s: EpSet, t: EpSet) -> EpSet:
    if s.is_empty or t.is_cofinite and t.threshold == 0:
        return t
    if t.is_empty or s.is_cofinite and s.threshold == 0:
        return s
    th, per, (ps, ws), (pt, wt) = _align(s, t)
    return EpSet(th, ps | pt, per, ws | wt)


def intersection(s: EpSet, t: EpSet) -> EpSet:
    if s.is_empty or t.is_empty:
        return EpSet.empty()
    th, per, (ps, ws), (pt, wt) = _align(s, t)
    return EpSet(th, ps & pt, per, ws & wt)


def difference(s: EpSet, t: EpSet) -> EpSet:
    th, per, (ps, ws), (pt, wt) = _align(s, t)
    return EpSet(th, ps & ~pt, per, ws & ~wt)


_BOOLEAN_OPS = {"union": union, "inter": intersection, "difference": difference}


def boolean_combine(op: str, s: EpSet, t: EpSet | None = None) -> EpSet:
    """Apply ``union``, ``inter``, ``difference`` or ``complement``."""
    if op == "complement":
        if t is not None:
            raise TypeError("complement takes one operand")
        return complement(s)
    if t is None:
        raise TypeError(f"{op} takes two operands")
    try:
        fn = _BOOLEAN_OPS[op]
    except KeyError:
        raise ValueError(f"unknown Boolean operation {op!r}") from None
    return fn(s, t)


def sumset(s: EpSet, t: EpSet) -> EpSet:
    """Exact sumset with a runtime periodicity certificate."""
    if s.is_empty or t.is_empty:
        return EpSet.empty()
    if s.is_finite and t.is_finite:
        top = s.max() + t.max() + 1
        _check_size(top, 1)
        return EpSet(top, sum_masks(s.prefix, t.prefix, top), 1, 0)
    period = math.lcm(s.period, t.period)
    start = s.threshold + t.threshold + s.period * t.period + period
    horizon = start + 2 * period
    _check_size(horizon, period)
    total = sum_masks(s.bits(horizon), t.bits(horizon), horizon)
    first = total >> start & low_mask(period)
    second = total >> (start + period) & low_mask(period)
    if first != second:
        raise CertificateError(
            f"sumset of {s} and {t} is not periodic from {start} with period {period}"
        )
    return EpSet(start, total & low_mask(start), period, first)


def dilate(s: EpSet, k: int) -> EpSet:
    """The set {k * n : n in s}."""
    if k < 0:
        raise EpSetError("dilation factor must be a natural number")
    if k == 0:
        return EpSet.empty() if s.is_empty else EpSet.singleton(0)
    if k == 1:
        return s
    _check_size(k * s.threshold, k * s.period)
    prefix = sum(1 << (k * i) for i in iter_bits(s.prefix))
    word = sum(1 << (k * i) for i in iter_bits(s.word))
    return EpSet(k * s.threshold, prefix, k * s.period, word)


def productset_finite(s: EpSet, t: EpSet) -> EpSet:
    """Exact productset when at least one operand is finite."""
    if s.is_empty or t.is_empty:
        return EpSet.empty()
    if not s.is_finite and not t.is_finite:
        raise InfiniteProductError("productset of two infinite sets is not handled exactly")
    if s.is_finite and t.is_finite:
        if s.card() > t.card():
            s, t = t, s
    elif not s.is_finite:
        s, t = t, s
    # s is finite; union the dilations of t
    out = EpSet.empty()
    for a in iter_bits(s.prefix):
        out = union(out, dilate(t, a))
    return out


def modprod(s: EpSet, t: EpSet) -> EpSet:
    """Productset restricted to nonzero factors."""
    zero = EpSet.singleton(0)
    return productset_finite(difference(s, zero), difference(t, zero))


_QUERIES: dict[str, Callable[[EpSet], bool | int | None]] = {
    "is_empty": lambda s: s.is_empty,
    "is_finite": lambda s: s.is_finite,
    "is_cofinite": lambda s: s.is_cofinite,
    "min": EpSet.min,
    "max": EpSet.max,
    "card": EpSet.card,
}


def decide(s: EpSet, query: str) -> bool | int | None:
    try:
        return _QUERIES[query](s)
    except KeyError:
        raise ValueError(f"unknown query {query!r}") from None


def _shove(s: EpSet) -> EpSet:
    low = s.min()
    if low is None:
        return s
    if low < s.threshold:
        return EpSet(s.threshold - low, s.prefix >> low, s.period, s.word)
    return EpSet(0, 0, s.period, rotate(s.word, low - s.threshold, s.period))


def _product_of_members(s: EpSet) -> int:
    out = 1
    limit = 1 << EXACT_LIMIT.bit_length()
    for n in iter_bits(s.prefix):
        out *= n
        if out == 0:
            return 0
        if out > limit:
            raise ExactTierLimit("product of members is too large")
    return out


def gate_lift(g: GateKind, s: EpSet) -> EpSet:
    """Apply a gate to an EP set exactly."""
    nat, empty, single = EpSet.naturals(), EpSet.empty(), EpSet.singleton
    if g is GateKind.MAX:
        return empty if s.is_empty else nat if not s.is_finite else single(s.max())
    if g is GateKind.MIN:
        return empty if s.is_empty else single(s.min())
    if g is GateKind.CARD:
        return single(s.card()) if s.is_finite else nat
    if g is GateKind.EPSILON:
        return single(0) if s.is_empty else empty
    if g is GateKind.FIN:
        return single(0) if s.is_finite else empty
    if g is GateKind.DOWN:
        return empty if s.is_empty else nat if not s.is_finite else EpSet.interval(0, s.max())
    if g is GateKind.BELOW:
        return nat if s.is_empty else EpSet.interval(0, s.min())
    if g is GateKind.SHOVE:
        return _shove(s)
    if g is GateKind.SUM:
        return single(sum(iter_bits(s.prefix))) if s.is_finite else nat
    if g is GateKind.PROD:
        return single(_product_of_members(s)) if s.is_finite else nat
    if g is GateKind.DISCRIMINATOR:
        return empty if s.is_empty else nat
    if g is GateKind.FMINUS1:
        return empty if s.is_empty else single(max(s.min() - 1, 0))
    if g is GateKind.MAXMINUS1:
        if s.prefix & ~1 == 0 and s.is_finite:
            return empty
        return single(s.max() - 1) if s.is_finite else nat
    raise ValueError(f"unknown gate {g!r}")
