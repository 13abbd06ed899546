"""Midpoint-radius balls over mpmath and rational recognition.

Every operation widens the radius by the propagated error plus one
rounding unit of the result, so the exact value of an expression built
from exact inputs stays inside the computed ball.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor

import mpmath
from mpmath import mp


def mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mp.mpf(x)._mpf_
    if man == 0:
        return Fraction(0)
    val = Fraction(int(man)) * (Fraction(2) ** exp)
    return -val if sign else val


def _ulp(x) -> mpmath.mpf:
    return abs(x) * mp.mpf(2) ** (2 - mp.prec)


class Ball:
    """Complex ball {z : |z - center| <= radius}."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius=0):
        self.center = mp.mpc(center)
        self.radius = mp.mpf(radius)
        if self.radius < 0:
            raise ValueError("negative radius")

    @classmethod
    def exact(cls, q) -> "Ball":
        """Ball around a rational (or integer), widened by its rounding error."""
        if isinstance(q, Ball):
            return q
        if isinstance(q, Fraction):
            c = mp.mpf(q.numerator) / q.denominator
            return cls(c, _ulp(c))
        if isinstance(q, int):
            c = mp.mpf(q)
            return cls(c, 0 if abs(q).bit_length() < mp.prec - 2 else _ulp(c))
        c = mp.mpc(q)
        return cls(c, _ulp(c))

    def _c(self, other) -> "Ball":
        return other if isinstance(other, Ball) else Ball.exact(other)

    def __repr__(self):
        return f"Ball({mpmath.nstr(self.center, 12)} +/- {mpmath.nstr(self.radius, 3)})"

    def __add__(self, other):
        o = self._c(other)
        c = self.center + o.center
        return Ball(c, self.radius + o.radius + _ulp(c))

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.center, self.radius)

    def __sub__(self, other):
        return self + (-self._c(other))

    def __rsub__(self, other):
        return self._c(other) - self

    def __mul__(self, other):
        o = self._c(other)
        c = self.center * o.center
        r = abs(self.center) * o.radius + abs(o.center) * self.radius + self.radius * o.radius
        return Ball(c, r + _ulp(c))

    __rmul__ = __mul__

    def inverse(self) -> "Ball":
        m = abs(self.center)
        if m <= self.radius:
            raise ZeroDivisionError("ball contains zero")
        c = 1 / self.center
        r = self.radius / (m * (m - self.radius))
        return Ball(c, r + _ulp(c))

    def __truediv__(self, other):
        return self * self._c(other).inverse()

    def __rtruediv__(self, other):
        return self._c(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = Ball(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "Ball":
        return Ball(mp.conj(self.center), self.radius)

    def real(self) -> "Ball":
        return Ball(mp.re(self.center), self.radius)

    def imag(self) -> "Ball":
        return Ball(mp.im(self.center), self.radius)

    def abs_upper(self):
        return abs(self.center) + self.radius

    def contains_zero(self) -> bool:
        return abs(self.center) <= self.radius

    def contains(self, z) -> bool:
        if isinstance(z, Fraction):
            # exact comparison through a fresh ball of the rational
            zb = Ball.exact(z)
            return abs(self.center - zb.center) <= self.radius + zb.radius
        return abs(self.center - mp.mpc(z)) <= self.radius

    def overlaps(self, other: "Ball") -> bool:
        return abs(self.center - other.center) <= self.radius + other.radius

    def sqrt_near(self, w) -> "Ball":
        """Ball around the square root of self that is closest to the approximation w."""
        w = mp.mpc(w)
        m = abs(w)
        if m == 0 or self.contains_zero():
            raise ZeroDivisionError("square root near zero is not isolated")
        err = abs(w * w - self.center) + self.radius
        r = 2 * err / m
        if r >= m / 2:
            raise ArithmeticError("approximate square root is too coarse")
        return Ball(w, r + _ulp(w))


def poly_root_balls(coeffs_low_to_high, roots) -> list[Ball]:
    """Balls around approximate simple roots of an exact rational polynomial.

    Uses the Newton bound 2*deg*|f(r)/f'(r)|, which encloses the nearest root
    for well-separated simple roots at working precision.
    """
    n = len(coeffs_low_to_high) - 1
    cs = [mp.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mp.mpf(c) for c in coeffs_low_to_high]
    out = []
    for r in roots:
        r = mp.mpc(r)
        fv = mpmath.polyval(list(reversed(cs)), r)
        dv = mpmath.polyval(list(reversed([i * c for i, c in enumerate(cs)][1:])), r)
        rad = 2 * n * abs(fv) / abs(dv) + _ulp(r)
        out.append(Ball(r, rad))
    return out


def _simplest_in(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational of least denominator (then least |numerator|) in [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -_simplest_in(-hi, -lo)
    fl = floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / _simplest_in(1 / (hi - fl), 1 / (lo - fl))


def rational_reconstruct(b: Ball, height_bound: int) -> Fraction | None:
    """Unique rational of height <= height_bound inside the ball, else None."""
    if not mp.isfinite(b.radius):
        return None
    if abs(mp.im(b.center)) > b.radius:
        return None
    c = mpf_to_fraction(mp.re(b.center))
    r = mpf_to_fraction(b.radius)
    lo, hi = c - r, c + r
    s = _simplest_in(lo, hi)
    if max(abs(s.numerator), s.denominator) > height_bound:
        return None
    gap = Fraction(1, height_bound * s.denominator)
    for a, z in ((lo, s - gap), (s + gap, hi)):
        if a <= z:
            t = _simplest_in(a, z)
            if max(abs(t.numerator), t.denominator) <= height_bound:
                return None
    return s
