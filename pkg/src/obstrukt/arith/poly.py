"""Dense univariate polynomials over Q or over a prime field F_p."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence


class _NegInfDegree:
    """Degree of the zero polynomial.

    Compares below every integer but refuses arithmetic, so a stray
    ``deg(0) + 1`` fails loudly instead of silently giving 0.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "-inf"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("-inf-degree")

    def _no_arith(self, *args):
        raise TypeError("degree of the zero polynomial does not support arithmetic")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = _no_arith
    __index__ = __int__ = _no_arith


NEG_INF = _NegInfDegree()


class Poly:
    """Polynomial with coefficients indexed by degree.

    ``p=None`` means rational coefficients (``Fraction``); otherwise the
    coefficients are integers reduced into ``[0, p)``.
    """

    __slots__ = ("coeffs", "p")

    def __init__(self, coeffs: Iterable = (), p: int | None = None):
        if p is None:
            cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        else:
            cs = [int(c) % p for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)
        self.p = p

    # constructors -----------------------------------------------------
    @classmethod
    def x(cls, p: int | None = None) -> "Poly":
        return cls([0, 1], p)

    @classmethod
    def const(cls, c, p: int | None = None) -> "Poly":
        return cls([c], p)

    @classmethod
    def from_roots(cls, roots: Sequence, p: int | None = None) -> "Poly":
        out = cls([1], p)
        for r in roots:
            out = out * cls([-r, 1], p)
        return out

    # basic properties ---------------------------------------------------
    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __getitem__(self, i: int):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0) if self.p is None else 0

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.p == other.p and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == Poly([other], self.p)
        return NotImplemented

    def __hash__(self):
        return hash((self.coeffs, self.p))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and c == 1:
                terms.append(mono)
            elif mono:
                terms.append(f"({c})*{mono}")
            else:
                terms.append(str(c))
        s = " + ".join(terms)
        return s if self.p is None else f"{s} (mod {self.p})"

    # field helpers ------------------------------------------------------
    def _inv(self, c):
        if self.p is None:
            return 1 / Fraction(c)
        return pow(int(c), -1, self.p)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.p != self.p:
                raise ValueError("coefficient domains differ")
            return other
        return Poly([other], self.p)

    # ring operations ----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[i] + other[i] for i in range(n)], self.p)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs], self.p)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return Poly([], self.p)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out, self.p)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        result, base = Poly([1], self.p), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def scale(self, c) -> "Poly":
        return Poly([c * a for a in self.coeffs], self.p)

    def __divmod__(self, other):
        other = self._coerce(other)
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly([], self.p), self
        inv = self._inv(other.coeffs[-1])
        quo = [0] * (dq + 1)
        m = len(other.coeffs) - 1
        for k in range(dq, -1, -1):
            c = rem[k + m]
            if self.p is not None:
                c %= self.p
            if c:
                q = c * inv
                if self.p is not None:
                    q %= self.p
                quo[k] = q
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return Poly(quo, self.p), Poly(rem[:m], self.p)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return self.scale(self._inv(self.coeffs[-1]))

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:], self.p)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        if self.p is not None and isinstance(acc, int):
            acc %= self.p
        return acc

    def eval_with(self, x, conv):
        """Horner evaluation after mapping each coefficient through ``conv``."""
        acc = conv(0)
        for c in reversed(self.coeffs):
            acc = acc * x + conv(c)
        return acc

    def compose(self, other: "Poly") -> "Poly":
        acc = Poly([], self.p)
        for c in reversed(self.coeffs):
            acc = acc * other + c
        return acc

    def powmod(self, e: int, m: "Poly") -> "Poly":
        result, base = Poly([1], self.p) % m, self % m
        while e:
            if e & 1:
                result = (result * base) % m
            base = (base * base) % m
            e >>= 1
        return result

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, self._coerce(other)
        while b.coeffs:
            a, b = b, a % b
        return a.monic()

    def xgcd(self, other: "Poly"):
        """Return (g, s, t) with s*self + t*other = g monic."""
        r0, r1 = self, self._coerce(other)
        s0, s1 = Poly([1], self.p), Poly([], self.p)
        t0, t1 = Poly([], self.p), Poly([1], self.p)
        while r1.coeffs:
            q, r = divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if not r0.coeffs:
            return r0, s0, t0
        inv = self._inv(r0.coeffs[-1])
        return r0.scale(inv), s0.scale(inv), t0.scale(inv)

    def inverse_mod(self, m: "Poly") -> "Poly":
        g, s, _ = self.xgcd(m)
        if g.degree != 0:
            raise ZeroDivisionError("not invertible modulo the given polynomial")
        return s % m

    # rational-only helpers ----------------------------------------------
    def content_primitive(self):
        """Split a rational polynomial as ``c * P`` with P integral, primitive, lc > 0."""
        if self.p is not None:
            raise ValueError("content is defined for rational polynomials")
        if not self.coeffs:
            return Fraction(0), self
        from math import gcd, lcm

        den = lcm(*(c.denominator for c in self.coeffs))
        ints = [int(c * den) for c in self.coeffs]
        g = gcd(*ints)
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den), Poly([v // g for v in ints])

    def integer_coeffs(self) -> list[int]:
        if any(c.denominator != 1 for c in self.coeffs):
            raise ValueError("polynomial is not integral")
        return [int(c) for c in self.coeffs]

    def reduce(self, p: int) -> "Poly":
        """Reduce a p-integral rational polynomial modulo p."""
        out = []
        for c in self.coeffs:
            if c.denominator % p == 0:
                raise ValueError(f"coefficient {c} is not {p}-integral")
            out.append(c.numerator * pow(c.denominator, -1, p))
        return Poly(out, p)


def reduce_mod(a: Poly, m: Poly) -> Poly:
    """Remainder of ``a`` modulo ``m`` (degree < deg m)."""
    if m.is_zero():
        raise ZeroDivisionError("zero modulus")
    return a % m


def resultant(a: Poly, b: Poly):
    """Resultant over the coefficient field via the Euclidean remainder sequence."""
    if a.is_zero() or b.is_zero():
        return Fraction(0) if a.p is None else 0
    one = Fraction(1) if a.p is None else 1
    acc = one
    while True:
        da, db = a.degree, b.degree
        if db == 0:
            r = acc * b.lc() ** da
            return r % a.p if a.p is not None else r
        r = a % b
        if r.is_zero():
            return Fraction(0) if a.p is None else 0
        dr = r.degree
        if (da * db) % 2:
            acc = -acc
        acc = acc * b.lc() ** (da - dr)
        if a.p is not None:
            acc %= a.p
        a, b = b, r


def discriminant(f: Poly):
    n = f.degree
    if n == NEG_INF or n < 1:
        raise ValueError("discriminant needs positive degree")
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    r = resultant(f, f.derivative())
    if f.p is None:
        return sign * r / f.lc()
    return sign * r * pow(f.lc(), -1, f.p) % f.p


# ---------------------------------------------------------------------------
# factorization over F_p


def _squarefree_parts(g: Poly):
    """Yun-style squarefree decomposition in characteristic p; yields (factor, mult)."""
    p = g.p
    out = []

    def rec(f: Poly, mult: int):
        if f.degree == 0:
            return
        fp = f.derivative()
        if fp.is_zero():
            # f is a p-th power: take p-th roots of coefficients (Frobenius is the identity on F_p)
            root = Poly([f.coeffs[i] for i in range(0, len(f.coeffs), p)], p)
            rec(root, mult * p)
            return
        c = f.gcd(fp)
        w = f // c
        i = 1
        while w.degree > 0:
            y = w.gcd(c)
            z = w // y
            if z.degree > 0:
                out.append((z.monic(), mult * i))
            i += 1
            w = y
            c = c // y
        if c.degree > 0:
            root = Poly([c.coeffs[k] for k in range(0, len(c.coeffs), p)], p)
            rec(root, mult * p)

    rec(g.monic(), 1)
    return out


def _distinct_degree(f: Poly):
    p = f.p
    out = []
    x = Poly.x(p)
    h = x % f
    d = 0
    while f.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(p, f)
        g = f.gcd(h - x)
        if g.degree > 0:
            out.append((g, d))
            f = f // g
            h = h % f
    if f.degree > 0:
        out.append((f.monic(), f.degree))
    return out


def _equal_degree(f: Poly, d: int, rng: random.Random):
    p = f.p
    if f.degree == d:
        return [f.monic()]
    n = f.degree
    while True:
        a = Poly([rng.randrange(p) for _ in range(n)], p)
        if a.degree <= 0:
            continue
        if p == 2:
            t, acc = a, a
            for _ in range(d - 1):
                t = (t * t) % f
                acc = acc + t
            b = acc
        else:
            b = a.powmod((p**d - 1) // 2, f) - 1
        g = f.gcd(b)
        if 0 < g.degree < n:
            return _equal_degree(g, d, rng) + _equal_degree(f // g, d, rng)


def factor_mod_p(g: Poly, p: int, seed: int = 0) -> list[tuple[Poly, int]]:
    """Monic irreducible factorization of ``g`` over F_p.

    ``g`` may be rational (p-integral) or already modulo p. The leading
    coefficient is dropped; the product of the factors with multiplicity
    equals ``g`` divided by its leading coefficient.
    """
    gp = g if g.p == p else g.reduce(p)
    if gp.is_zero():
        raise ValueError("polynomial vanishes modulo p")
    if gp.degree == 0:
        return []
    rng = random.Random(seed)
    out = []
    for part, mult in _squarefree_parts(gp):
        for block, d in _distinct_degree(part):
            for fac in _equal_degree(block, d, rng):
                out.append((fac, mult))
    merged: dict[Poly, int] = {}
    for fac, m in out:
        merged[fac] = merged.get(fac, 0) + m
    return sorted(merged.items(), key=lambda fm: (fm[0].degree, fm[0].coeffs))


def roots_mod_p(g: Poly, p: int) -> list[int]:
    """Distinct roots of ``g`` in F_p, sorted."""
    gp = g if g.p == p else g.reduce(p)
    if gp.is_zero():
        raise ValueError("polynomial vanishes modulo p")
    if gp.degree <= 0:
        return []
    x = Poly.x(p)
    h = x.powmod(p, gp)
    split = gp.gcd(h - x)
    roots = []
    for fac, _ in factor_mod_p(split, p) if split.degree > 0 else []:
        roots.append((-fac.coeffs[0]) % p)
    return sorted(roots)


def splits_completely(g: Poly, p: int) -> bool:
    """True when ``g`` is a product of distinct linear factors modulo p."""
    gp = g if g.p == p else g.reduce(p)
    if gp.degree != g.degree:
        return False
    facs = factor_mod_p(gp, p)
    return all(f.degree == 1 and m == 1 for f, m in facs)
