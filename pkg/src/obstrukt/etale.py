"""The etale algebra A_f = Q[x]/(f), square classes and the twist-prime sieve."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

from .arith import (
    Poly,
    discriminant,
    factor_mod_p,
    hensel_root,
    is_padic_square,
    legendre,
    resultant,
    roots_mod_p,
    splits_completely,
    valuation,
)
from .data import FAMILY_POLYS, FAMILY_REQUIRED_PLACES, FAMILY_RESIDUES

INF = "inf"


class NotSplitError(ValueError):
    pass


class CheckNotRequired(ValueError):
    pass


def is_rational_square(q) -> bool:
    q = Fraction(q)
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def squarefree_part(q) -> int:
    """Squarefree integer representing the square class of a nonzero rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("zero has no square class")
    m = abs(q.numerator * q.denominator)
    sign = -1 if q < 0 else 1
    out, d = 1, 2
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        if e % 2:
            out *= d
        d += 1 if d == 2 else 2
    return sign * out * m


@dataclass(frozen=True)
class Curve:
    """y^2 = n f(x) with f a squarefree sextic over Q."""

    f: Poly
    factors: tuple[Poly, ...] | None = None
    n: int = 1

    def __post_init__(self):
        if self.f.p is not None or self.f.degree != 6:
            raise ValueError("f must be a rational polynomial of degree 6")
        if discriminant(self.f) == 0:
            raise ValueError("f is not squarefree")
        if self.factors is not None:
            if sum(g.degree for g in self.factors) != 6:
                raise ValueError("factor degrees must sum to 6")
            prod = Poly([1])
            for g in self.factors:
                prod = prod * g
            if prod.monic() != self.f.monic():
                raise ValueError("factors do not multiply to f")
        if self.n < 1:
            raise ValueError("twist multiplier must be positive")

    @classmethod
    def from_factors(cls, factors: Sequence[Sequence], n: int = 1) -> "Curve":
        fs = tuple(Poly(c) for c in factors)
        f = Poly([1])
        for g in fs:
            f = f * g
        return cls(f, fs, n)

    def twist(self, n: int) -> "Curve":
        return Curve(self.f, self.factors, n)


@dataclass(frozen=True)
class EtaleElement:
    """Element of A_f represented by a polynomial of degree < 6."""

    rep: Poly
    curve: Curve = field(repr=False)

    def __post_init__(self):
        r = self.rep % self.curve.f
        object.__setattr__(self, "rep", r)
        if r.is_zero() or resultant(self.curve.f, r) == 0:
            raise ValueError("element is not invertible modulo f")

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, curve: Curve) -> "EtaleElement":
        return cls(Poly(coeffs), curve)

    def __mul__(self, other: "EtaleElement") -> "EtaleElement":
        return EtaleElement((self.rep * other.rep) % self.curve.f, self.curve)

    def scale(self, s) -> "EtaleElement":
        return EtaleElement(self.rep.scale(Fraction(s)), self.curve)

    def square(self) -> "EtaleElement":
        return self * self

    def __call__(self, x):
        return self.rep(x)


def norm_to_base(d: EtaleElement) -> Fraction:
    """Norm from A_f to Q: res(f, rep) / lc(f)^deg(rep)."""
    f = d.curve.f
    return Fraction(resultant(f, d.rep)) / Fraction(f.lc()) ** d.rep.degree


def norm_is_square_class_trivial(d: EtaleElement) -> bool:
    return is_rational_square(norm_to_base(d))


@dataclass(frozen=True)
class DdaggerReport:
    sufficient: bool
    verdict: str  # "true (sufficient)" or "undecided"
    odd_factors: tuple[int, ...]


def ddagger_sufficient(c: Curve) -> bool:
    """True when some irreducible factor of f has odd degree."""
    return ddagger_report(c).sufficient


def ddagger_report(c: Curve) -> DdaggerReport:
    if c.factors is None:
        return DdaggerReport(False, "undecided", ())
    odd = tuple(g.degree for g in c.factors if g.degree % 2)
    return DdaggerReport(bool(odd), "true (sufficient)" if odd else "undecided", odd)


@dataclass(frozen=True)
class ComponentValue:
    root: int
    precision: int
    value_valuation: int
    unit_residue: int
    verdict: str  # "square" or "nonsquare"


def _integral_scaled(poly: Poly):
    den = 1
    for c in poly.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in poly.coeffs], den


def component_values(d: EtaleElement, p: int, k: int = 20) -> list[ComponentValue]:
    """Square verdicts of d at the six p-adic roots of f (f split mod p, p odd, unramified)."""
    f = d.curve.f
    if p == 2:
        raise ValueError("p must be odd")
    lc = f.lc()
    if valuation(lc, p) != 0 or any(c.denominator % p == 0 for c in f.coeffs):
        raise ValueError(f"f is not p-integral with unit leading coefficient at {p}")
    if valuation(discriminant(f), p) != 0:
        raise ValueError(f"{p} divides disc(f)")
    if not splits_completely(f, p):
        raise NotSplitError(f"f does not split into distinct linear factors mod {p}")
    ints, den = _integral_scaled(d.rep)
    vden = valuation(den, p)
    while True:
        out, retry = [], False
        for r in roots_mod_p(f, p):
            lifted = hensel_root(f, r, p, k)
            mod = p**k
            val = 0
            for c in reversed(ints):
                val = (val * lifted + c) % mod
            if val == 0:
                retry = True
                break
            v = valuation(val, p)
            if v >= k // 2:
                retry = True
                break
            unit = (val // p**v) * pow(den // p**vden, -1, p) % p
            vv = v - vden
            sq = vv % 2 == 0 and legendre(unit, p) == 1
            out.append(ComponentValue(lifted, k, vv, unit, "square" if sq else "nonsquare"))
        if not retry:
            return out
        k *= 2
        if k > 640:
            raise ArithmeticError("valuation did not stabilise")


def _reduces_to_distinct_linear(poly_coeffs, p: int) -> bool:
    g = Poly(poly_coeffs)
    return splits_completely(g, p)


def twist_prime_report(
    p: int,
    polys: Sequence[Sequence[int]] = FAMILY_POLYS,
    residues: Sequence[int] = FAMILY_RESIDUES,
) -> dict:
    """Evidence for the twist-prime test: splitting of each polynomial and residue symbols."""
    if p == 2:
        return {"p": p, "eligible": False, "reason": "ineligible (ramified)"}
    bad = 2
    for g in polys:
        bad *= abs(discriminant(Poly(g)).numerator)
    for a in residues:
        bad *= abs(a)
    if bad % p == 0:
        return {"p": p, "eligible": False, "reason": "ineligible (ramified)"}
    splits = [_reduces_to_distinct_linear(g, p) for g in polys]
    syms = [legendre(a, p) for a in residues]
    ok = all(splits) and all(s == 1 for s in syms)
    return {"p": p, "eligible": ok, "splits": splits, "residue_symbols": syms}


def twist_prime_eligible(p: int, polys=FAMILY_POLYS, residues=FAMILY_RESIDUES) -> bool:
    return twist_prime_report(p, polys, residues)["eligible"]


def eligible_twist_primes(bound: int, polys=FAMILY_POLYS, residues=FAMILY_RESIDUES):
    """Generator of eligible primes up to ``bound`` in increasing order."""
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    for p in range(3, bound + 1, 2):
        if not sieve[p]:
            continue
        # cheap residue filter before factoring
        if any(legendre(a, p) != 1 for a in residues if a % p):
            continue
        if twist_prime_eligible(p, polys, residues):
            yield p


@dataclass(frozen=True)
class SquareClassReport:
    place: object
    components: tuple[str, ...]
    overall: str  # "eligible", "ineligible", "undecided"
    note: str = ""


def selmer_local_eligibility(
    c: Curve, d: EtaleElement, place, required=FAMILY_REQUIRED_PLACES
) -> SquareClassReport:
    """Local check that d stays in the Selmer image for the twist y^2 = n f(x)."""
    n = c.n
    divisors_n = [q for q in range(2, n + 1) if n % q == 0 and all(q % r for r in range(2, isqrt(q) + 1))]
    if place not in required and place not in divisors_n:
        raise CheckNotRequired(f"check not required at {place}")
    if place in divisors_n and place not in required:
        try:
            comps = component_values(d, place)
        except NotSplitError:
            return SquareClassReport(place, (), "ineligible", "f not split")
        except ValueError as exc:
            return SquareClassReport(place, (), "undecided", str(exc))
        verdicts = tuple(cv.verdict for cv in comps)
        ok = all(v == "square" for v in verdicts)
        return SquareClassReport(place, verdicts, "eligible" if ok else "ineligible")
    if place == INF:
        inherited = n > 0
    else:
        inherited = is_padic_square(n, place)
    if inherited:
        return SquareClassReport(place, (), "eligible", "inherited")
    return SquareClassReport(place, (), "undecided", "n is not a local square")


def family_report(c: Curve, d: EtaleElement, required=FAMILY_REQUIRED_PLACES) -> list[SquareClassReport]:
    n = c.n
    places = list(required)
    q = 2
    m = n
    while q * q <= m:
        if m % q == 0:
            if q not in places:
                places.append(q)
            while m % q == 0:
                m //= q
        q += 1
    if m > 1 and m not in places:
        places.append(m)
    return [selmer_local_eligibility(c, d, pl, required) for pl in places]


def square_class_at_rational_roots(d: EtaleElement) -> dict:
    """delta(r) and its squarefree class at each rational root r of f."""
    out = {}
    for fac in d.curve.factors or ():
        if fac.degree == 1:
            r = -fac.coeffs[0] / fac.coeffs[1]
            v = d.rep(r)
            out[r] = (v, squarefree_part(v))
    return out


def factor_over_q_shape(c: Curve) -> list[int]:
    return sorted(g.degree for g in c.factors) if c.factors else []


def charpoly_mod(d: Poly, g: Poly) -> Poly:
    """Characteristic polynomial of multiplication by d on Q[x]/(g)."""
    from .arith.linalg_q import det_q  # local import keeps module load light

    n = g.degree
    basis = [Poly([0] * i + [1]) for i in range(n)]
    cols = []
    for b in basis:
        r = (d * b) % g
        cols.append([r[i] for i in range(n)])
    M = [[cols[j][i] for j in range(n)] for i in range(n)]
    # det(tI - M) via interpolation at n+1 integer points
    pts = list(range(n + 1))
    vals = [det_q([[Fraction(int(i == j) * t) - M[i][j] for j in range(n)] for i in range(n)]) for t in pts]
    # Lagrange interpolation to coefficients
    out = Poly([])
    for i, t in enumerate(pts):
        li = Poly([1])
        denom = Fraction(1)
        for j, s in enumerate(pts):
            if j != i:
                li = li * Poly([-s, 1])
                denom *= t - s
        out = out + li.scale(vals[i] / denom)
    return out


def delta_scalar_for_hint(d: EtaleElement, c_hint) -> Fraction | None:
    """Rational s with s*delta(r) = c_hint at the first rational root, if one exists."""
    vals = square_class_at_rational_roots(d)
    if not vals:
        return None
    r = sorted(vals)[0]
    return Fraction(c_hint) / vals[r][0]


__all__ = [
    "Curve",
    "EtaleElement",
    "norm_to_base",
    "ddagger_sufficient",
    "ddagger_report",
    "component_values",
    "twist_prime_eligible",
    "twist_prime_report",
    "eligible_twist_primes",
    "selmer_local_eligibility",
    "family_report",
    "SquareClassReport",
    "is_rational_square",
    "squarefree_part",
    "charpoly_mod",
    "factor_mod_p",
]
