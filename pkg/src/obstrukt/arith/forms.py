"""Homogeneous forms in a fixed number of variables."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence


@lru_cache(maxsize=None)
def monomials(degree: int, nvars: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of the given total degree in lexicographic order.

    For degree 2 in six variables this is a0^2, a0a1, ..., a0a5, a1^2, ..., a5^2.
    """
    mons = [e for e in itertools.product(range(degree + 1), repeat=nvars) if sum(e) == degree]
    return tuple(sorted(mons, reverse=True))


@lru_cache(maxsize=None)
def monomial_index(degree: int, nvars: int) -> dict:
    return {e: k for k, e in enumerate(monomials(degree, nvars))}


class Form:
    """Homogeneous polynomial stored as {exponent tuple: coefficient}."""

    __slots__ = ("terms", "nvars", "degree")

    def __init__(self, terms: Mapping[tuple, object], nvars: int, degree: int):
        self.nvars = nvars
        self.degree = degree
        clean = {}
        for e, c in terms.items():
            if c:
                if len(e) != nvars or sum(e) != degree:
                    raise ValueError(f"monomial {e} does not have degree {degree} in {nvars} variables")
                clean[tuple(e)] = c
        self.terms = clean

    # conversions ----------------------------------------------------------
    @classmethod
    def from_vector(cls, vec: Sequence, degree: int, nvars: int) -> "Form":
        mons = monomials(degree, nvars)
        if len(vec) != len(mons):
            raise ValueError(f"expected {len(mons)} coefficients, got {len(vec)}")
        return cls(dict(zip(mons, vec)), nvars, degree)

    def to_vector(self) -> list:
        return [self.terms.get(e, 0) for e in monomials(self.degree, self.nvars)]

    @classmethod
    def linear(cls, coeffs: Sequence) -> "Form":
        n = len(coeffs)
        return cls({tuple(int(i == j) for i in range(n)): c for j, c in enumerate(coeffs)}, n, 1)

    def matrix(self) -> list[list]:
        """Hessian matrix of a quadratic form (so Q(x) = x^T M x / 2); integral for integral Q."""
        if self.degree != 2:
            raise ValueError("matrix() needs a quadratic form")
        n = self.nvars
        M = [[0] * n for _ in range(n)]
        for e, c in self.terms.items():
            idx = [i for i in range(n) for _ in range(e[i])]
            i, j = idx
            if i == j:
                M[i][i] += 2 * c
            else:
                M[i][j] += c
                M[j][i] += c
        return M

    @classmethod
    def from_matrix(cls, M: Sequence[Sequence]) -> "Form":
        n = len(M)
        terms = {}
        for i in range(n):
            for j in range(i, n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                c = Fraction(M[i][i], 2) if i == j else M[i][j]
                if isinstance(c, Fraction) and c.denominator == 1:
                    c = int(c)
                terms[tuple(e)] = c
        return cls(terms, n, 2)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: "Form") -> "Form":
        if (self.nvars, self.degree) != (other.nvars, other.degree):
            raise ValueError("incompatible forms")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Form(out, self.nvars, self.degree)

    def __neg__(self):
        return Form({e: -c for e, c in self.terms.items()}, self.nvars, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "Form":
        return Form({e: s * c for e, c in self.terms.items()}, self.nvars, self.degree)

    def __mul__(self, other: "Form") -> "Form":
        if isinstance(other, Form):
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, 0) + c1 * c2
            return Form(out, self.nvars, self.degree + other.degree)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, Form)
            and (self.nvars, self.degree) == (other.nvars, other.degree)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, self.degree, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return f"Form(deg={self.degree}, nvars={self.nvars}, terms={len(self.terms)})"

    # evaluation -----------------------------------------------------------
    def __call__(self, point: Sequence):
        acc = 0
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = t * x**k
            acc = acc + t
        return acc

    def eval_mod(self, point: Sequence[int], mod: int) -> int:
        acc = 0
        for e, c in self.terms.items():
            t = c % mod
            for x, k in zip(point, e):
                if k:
                    t = t * pow(x, k, mod) % mod
            acc += t
        return acc % mod

    def partial(self, i: int) -> "Form":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = out.get(tuple(e2), 0) + c * e[i]
        return Form(out, self.nvars, self.degree - 1)

    def gradient(self) -> list["Form"]:
        return [self.partial(i) for i in range(self.nvars)]

    # normalisation --------------------------------------------------------
    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.terms.values())

    def primitive(self) -> "Form":
        """Primitive integer multiple with positive leading (lex-first) coefficient."""
        if not self.terms:
            return self
        cs = [Fraction(c) for c in self.terms.values()]
        den = lcm(*(c.denominator for c in cs))
        ints = {e: int(Fraction(c) * den) for e, c in self.terms.items()}
        g = gcd(*ints.values())
        lead = next(e for e in monomials(self.degree, self.nvars) if e in ints)
        if ints[lead] < 0:
            g = -g
        return Form({e: v // g for e, v in ints.items()}, self.nvars, self.degree)

    def primitive_scale(self) -> Fraction:
        """The rational s with self.primitive() == s * self."""
        prim = self.primitive()
        e = next(iter(prim.terms))
        return Fraction(prim.terms[e]) / Fraction(self.terms[e])


def forms_rank(forms: Iterable[Form]) -> int:
    """Rank over Q of the coefficient vectors of several forms."""
    from .linalg_q import rank_q

    return rank_q([f.to_vector() for f in forms])
