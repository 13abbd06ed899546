"""Prime-field and bounded-precision p-adic helpers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def valuation(x, p: int) -> int | float:
    """p-adic valuation of an integer or rational; ``inf`` for zero."""
    if not isinstance(x, Fraction):
        x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x, p: int) -> Fraction:
    x = Fraction(x)
    v = valuation(x, p)
    return x / Fraction(p) ** v


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _tonelli(a: int, p: int) -> int | None:
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


@dataclass(frozen=True)
class PadicInt:
    """Residue modulo p^k; arithmetic keeps the smaller precision."""

    p: int
    k: int
    residue: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("precision must be at least 1")
        object.__setattr__(self, "residue", self.residue % self.p**self.k)

    def _meet(self, other):
        if isinstance(other, PadicInt):
            if other.p != self.p:
                raise ValueError("different primes")
            return min(self.k, other.k), other.residue
        return self.k, int(other)

    def __add__(self, other):
        k, r = self._meet(other)
        return PadicInt(self.p, k, self.residue + r)

    __radd__ = __add__

    def __sub__(self, other):
        k, r = self._meet(other)
        return PadicInt(self.p, k, self.residue - r)

    def __rsub__(self, other):
        k, r = self._meet(other)
        return PadicInt(self.p, k, r - self.residue)

    def __mul__(self, other):
        k, r = self._meet(other)
        return PadicInt(self.p, k, self.residue * r)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicInt(self.p, self.k, -self.residue)

    def __eq__(self, other):
        if isinstance(other, PadicInt):
            k = min(self.k, other.k)
            return self.p == other.p and (self.residue - other.residue) % self.p**k == 0
        if isinstance(other, int):
            return (self.residue - other) % self.p**self.k == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.k, self.residue))

    def __int__(self):
        return self.residue

    def valuation(self) -> int:
        """Valuation, capped at the precision when the residue is zero."""
        if self.residue == 0:
            return self.k
        v, r = 0, self.residue
        while r % self.p == 0:
            r //= self.p
            v += 1
        return v


def sqrt_mod(a: int, p: int, k: int = 1) -> PadicInt | None:
    """Square root of a unit modulo p^k for odd p, lifted by Newton steps.

    Returns the branch whose residue mod p is the smaller representative,
    or ``None`` when ``a`` is a nonresidue.
    """
    if p == 2:
        raise ValueError("use is_square_2adic at p = 2")
    if a % p == 0:
        raise ValueError("sqrt_mod expects a unit")
    r = _tonelli(a, p)
    if r is None:
        return None
    r = min(r, p - r)
    mod = p
    while mod < p**k:
        mod = min(mod * mod, p**k)
        r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
    return PadicInt(p, k, r)


def is_square_2adic(x) -> bool:
    """Square test in Q_2: even valuation and unit part = 1 mod 8."""
    x = Fraction(x)
    if x == 0:
        return True
    v = valuation(x, 2)
    if v % 2:
        return False
    u = unit_part(x, 2)
    return (u.numerator * u.denominator) % 8 == 1


def is_padic_square(x, p: int) -> bool:
    """Square test in Q_p for a rational x (p = 2 handled by the mod-8 rule)."""
    x = Fraction(x)
    if x == 0:
        return True
    if p == 2:
        return is_square_2adic(x)
    v = valuation(x, p)
    if v % 2:
        return False
    u = unit_part(x, p)
    return legendre(u.numerator * u.denominator, p) == 1


def hensel_root(f, r: int, p: int, k: int) -> int:
    """Lift a simple root r of an integral Poly f modulo p to a root modulo p^k."""
    fp = f.derivative()
    mod = p
    while mod < p**k:
        mod = min(mod * mod, p**k)
        num = f.eval_with(r, lambda c: c.numerator * pow(c.denominator, -1, mod))
        den = fp.eval_with(r, lambda c: c.numerator * pow(c.denominator, -1, mod))
        r = (r - num * pow(den % mod, -1, mod)) % mod
    return r % p**k
