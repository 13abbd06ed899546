"""The odd-degree model and the degree-4 Del Pezzo surface W_beta covered by V.

When f = (x - a) f5 has a rational root a, the substitution u = 1/(x - a),
w = y/(x - a)^3 gives w^2 = g(u) with g(u) = u^5 f5(1/u + a).  A Selmer
element delta of A_f moves to beta(u) = u^6 delta(1/u + a)/delta(a) in A_g,
W_beta is the locus of s in A_g with beta s^2 quadratic mod g, and
q |-> s = u^-2 q(1/u + a) mod g maps V_delta 2:1 onto W_beta.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .arith import Form, Poly, discriminant, legendre
from .etale import Curve, EtaleElement, is_rational_square
from .surface import QuadricModel

NW = 5


@dataclass(frozen=True)
class OddModel:
    """w^2 = g(u), g = scalar * u^5 f5(1/u + a), deg g = 5."""

    g: Poly
    a: Fraction
    f5: Poly
    scalar: Fraction

    def __post_init__(self):
        if self.g.degree != 5:
            raise ValueError("odd-degree model needs a quintic")
        if discriminant(self.g) == 0:
            raise ValueError("g is not squarefree")

    def round_trip(self) -> Poly:
        """(x - a)^6 g(1/(x - a)) / scalar, which should equal (x - a) f5."""
        # (x - a)^6 g(1/(x - a)) = sum_k g_k (x - a)^(6 - k)
        xa = Poly([-self.a, 1])
        out = Poly([])
        for k, gk in enumerate(self.g.coeffs):
            out = out + (xa ** (6 - k)).scale(gk)
        return out.scale(1 / self.scalar)

    def to_json(self) -> dict:
        return {
            "g": [str(c) for c in self.g.coeffs],
            "a": str(self.a),
            "scalar": str(self.scalar),
            "change_of_variables": "w = y/(x - a)^3, u = 1/(x - a)",
        }


class DP4Model(QuadricModel):
    """Two integral quadrics in the coefficients s0..s4 of s(u)."""

    def __post_init__(self):
        super().__post_init__()
        if len(self.forms) != 2 or self.nvars != NW:
            raise ValueError("a DP4 model is two quadrics in five variables")

    @classmethod
    def from_vectors(cls, vecs, provenance="user-supplied", nvars: int = NW):
        return cls(tuple(Form.from_vector([int(c) for c in v], 2, nvars) for v in vecs), provenance)


def _poly_of(c) -> Poly:
    return c.f if isinstance(c, Curve) else Poly(c.coeffs if isinstance(c, Poly) else c)


def odd_degree_model(c: Curve | Poly, a) -> OddModel:
    """Send the rational Weierstrass point x = a to infinity.

    g is scaled by the smallest square making it integral; the scale is
    recorded.
    """
    f = _poly_of(c)
    a = Fraction(a)
    xa = Poly([-a, 1])
    f5, rem = divmod(f, xa)
    if not rem.is_zero():
        raise ValueError(f"x = {a} is not a root of f")
    if f5(a) == 0:
        raise ValueError(f"x = {a} is a repeated root of f")
    # u^5 f5(1/u + a) = sum_k c_k (1 + a u)^k u^(5 - k)
    one_au = Poly([1, a])
    raw = Poly([])
    for k, ck in enumerate(f5.coeffs):
        raw = raw + ((one_au**k) * Poly([0] * (5 - k) + [1])).scale(ck)
    den = lcm(*(x.denominator for x in raw.coeffs))
    scalar = Fraction(den * den)
    return OddModel(raw.scale(scalar), a, f5, scalar)


def transfer_delta(d: EtaleElement, model: OddModel) -> Poly:
    """beta = u^6 delta(1/u + a) / delta(a) reduced mod g."""
    da = d.rep(model.a)
    if da == 0:
        raise ValueError("delta vanishes at the rational root")
    one_au = Poly([1, model.a])
    out = Poly([])
    for k, ck in enumerate(d.rep.coeffs):
        out = out + ((one_au**k) * Poly([0] * (6 - k) + [1])).scale(ck)
    return (out.scale(1 / da)) % model.g


def norm_g(beta: Poly, model: OddModel) -> Fraction:
    """Norm from A_g to Q."""
    from .arith import resultant

    g = model.g
    return Fraction(resultant(g, beta)) / Fraction(g.lc()) ** beta.degree


def beta_norm_is_square(beta: Poly, model: OddModel) -> bool:
    return is_rational_square(norm_g(beta, model))


def _remainders(beta: Poly, g: Poly) -> list[Poly]:
    return [(beta * Poly([0] * k + [1], beta.p)) % g for k in range(2 * NW - 1)]


def _coefficient_form(rems: Sequence[Poly], j: int) -> Form:
    terms = {}
    for i in range(NW):
        for k in range(i, NW):
            coef = rems[i + k][j] * (1 if i == k else 2)
            if coef:
                e = [0] * NW
                e[i] += 1
                e[k] += 1
                terms[tuple(e)] = coef
    return Form(terms, NW, 2)


def build_dp4(model: OddModel, beta: Poly) -> DP4Model:
    """W_beta: the u^4 and u^3 coefficients of beta s^2 mod g, made primitive."""
    if beta.gcd(model.g).degree != 0:
        raise ValueError("beta is not invertible mod g")
    rems = _remainders(beta, model.g)
    forms = tuple(_coefficient_form(rems, j).primitive() for j in (4, 3))
    return DP4Model(forms, "constructed-from-(g,beta)")


def _reduce(P: Poly, p: int) -> Poly:
    return Poly([c.numerator * pow(c.denominator, -1, p) for c in P.coeffs], p)


def _scalar(x, p: int | None):
    x = Fraction(x)
    return x if p is None else x.numerator * pow(x.denominator, -1, p) % p


def double_cover(q: Sequence, model: OddModel, p: int | None = None) -> list:
    """s(u) = u^-2 q(1/u + a) mod g, for q = (a0, ..., a5) over Q or F_p."""
    g = model.g if p is None else _reduce(model.g, p)
    a = _scalar(model.a, p)
    one_au = Poly([1, a], p)
    P = Poly([], p)
    for k, ak in enumerate(q):
        ak = _scalar(ak, p)
        if ak:
            P = P + ((one_au**k) * Poly([0] * (5 - k) + [1], p)).scale(ak)
    u7 = Poly([0] * 7 + [1], p) % g
    s = (P * u7.inverse_mod(g)) % g
    return [s[i] for i in range(NW)]


def quadratic_part(beta: Poly, s: Sequence, model: OddModel, p: int | None = None) -> Poly:
    """beta s^2 mod g (a quadratic exactly when s lies on W_beta)."""
    g = model.g if p is None else _reduce(model.g, p)
    b = beta if p is None else _reduce(beta, p)
    S = Poly(list(s), p)
    return (b * S * S) % g


def preimage_count(beta: Poly, s: Sequence, model: OddModel, p: int) -> int:
    """F_p-points of V above s: 1 + (l/p) where l = q(a)^2 is the u^2 coefficient of beta s^2."""
    lead = quadratic_part(beta, s, model, p)[2]
    return 1 + legendre(int(lead), p)


__all__ = [
    "OddModel",
    "DP4Model",
    "odd_degree_model",
    "transfer_delta",
    "norm_g",
    "beta_norm_is_square",
    "build_dp4",
    "double_cover",
    "quadratic_part",
    "preimage_count",
]
