"""Prime tests, sieving and factorisation (factorisation delegated to PARI)."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from cypari import pari


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


def is_prime(n: int) -> bool:
    return n >= 2 and bool(pari.isprime(n))


def prime_factors(x) -> list[int]:
    """Sorted prime support of a nonzero integer or rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no prime factorisation")
    out = set()
    for n in (abs(x.numerator), x.denominator):
        if n > 1:
            out.update(int(q) for q in pari.factor(n)[0])
    return sorted(out)
