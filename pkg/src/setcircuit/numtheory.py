"""Classical number-theory routines used as reference oracles.

Nothing here touches circuits; these are the independent answers that
catalog verification compares circuit output against.
"""

from __future__ import annotations

import math


def sieve(limit: int) -> bytearray:
    """Return a bytearray ``flags`` with ``flags[n] == 1`` iff ``n`` is prime, for n <= limit."""
    if limit < 0:
        return bytearray()
    flags = bytearray([1]) * (limit + 1)
    flags[0] = 0
    if limit >= 1:
        flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return flags


def primes_upto(limit: int) -> list[int]:
    flags = sieve(limit)
    return [n for n, f in enumerate(flags) if f]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    m = n + 1
    while not is_prime(m):
        m += 1
    return m


def multiplicative_order(a: int, n: int) -> int:
    """Least e >= 1 with a**e = 1 (mod n).

    Raises ValueError when gcd(a, n) != 1 or n < 1.
    """
    if n < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not invertible modulo {n}")
    if n == 1:
        return 1
    e, x = 1, a % n
    while x != 1:
        x = (x * a) % n
        e += 1
    return e


def goldbach_counterexamples(limit: int) -> list[int]:
    """Even numbers 4..limit that are not a sum of two primes (brute force)."""
    flags = sieve(limit)
    primes = [p for p in range(limit + 1) if flags[p]]
    bad = []
    for n in range(4, limit + 1, 2):
        if not any(flags[n - p] for p in primes if p <= n // 2):
            bad.append(n)
    return bad


def fermat_numbers_upto(limit: int) -> list[int]:
    out = []
    k = 0
    while (1 << (1 << k)) + 1 <= limit:
        out.append((1 << (1 << k)) + 1)
        k += 1
    return out
