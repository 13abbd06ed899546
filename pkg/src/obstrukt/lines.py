"""The 32 lines on V: labels, pairing, the rank-17 lattice and numeric coordinates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import mpmath
from mpmath import mp

from .arith import Ball, IntMatrix, Poly, poly_root_balls, smith_normal_form
from .arith.linalg_q import inverse_q
from .etale import Curve, EtaleElement

NLINES = 32
RANK = 17


# --- labels ------------------------------------------------------------------


def normalize(s: Sequence[int]) -> tuple[int, ...]:
    """Representative of s modulo the all-ones vector with s_1 = 0."""
    s = tuple(int(b) & 1 for b in s)
    if len(s) != 6:
        raise ValueError("line index needs six bits")
    return tuple(1 - b for b in s) if s[0] else s


def label(s) -> int:
    """Binary label sum 2^(6-i) s_i of the normalized representative (0..31)."""
    if isinstance(s, int):
        if not 0 <= s < 64:
            raise ValueError("label out of range")
        s = bits(s)
    s = normalize(s)
    return sum(b << (5 - i) for i, b in enumerate(s))


def bits(n: int) -> tuple[int, ...]:
    return tuple((n >> (5 - i)) & 1 for i in range(6))


def intersection_number(s1, s2) -> int:
    a, b = bits(label(s1)), bits(label(s2))
    d = sum(x != y for x, y in zip(a, b))
    if d in (0, 6):
        return -2
    if d in (1, 5):
        return 1
    return 0


def gram_matrix() -> list[list[int]]:
    return [[intersection_number(i, j) for j in range(NLINES)] for i in range(NLINES)]


# --- divisors ----------------------------------------------------------------


class Divisor:
    """Finite Z-combination of line classes, keyed by label."""

    __slots__ = ("mult",)

    def __init__(self, mult: Mapping | None = None):
        clean: dict[int, int] = {}
        for k, v in (mult or {}).items():
            lab = label(k)
            clean[lab] = clean.get(lab, 0) + int(v)
        self.mult = {k: v for k, v in sorted(clean.items()) if v}

    @classmethod
    def of(cls, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> "Divisor":
        d: dict[int, int] = {}
        for k in pos:
            d[k] = d.get(k, 0) + 1
        for k in neg:
            d[k] = d.get(k, 0) - 1
        return cls(d)

    def __add__(self, other):
        d = dict(self.mult)
        for k, v in other.mult.items():
            d[k] = d.get(k, 0) + v
        return Divisor(d)

    def __neg__(self):
        return Divisor({k: -v for k, v in self.mult.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n: int):
        return Divisor({k: n * v for k, v in self.mult.items()})

    def __eq__(self, other):
        return isinstance(other, Divisor) and self.mult == other.mult

    def __hash__(self):
        return hash(tuple(self.mult.items()))

    def __repr__(self):
        pos = " + ".join(f"{v if v != 1 else ''}L{k}" for k, v in self.mult.items() if v > 0)
        neg = " + ".join(f"{-v if v != -1 else ''}L{k}" for k, v in self.mult.items() if v < 0)
        return f"Divisor({pos or '0'}{' - (' + neg + ')' if neg else ''})"

    def vector(self) -> list[int]:
        v = [0] * NLINES
        for k, m in self.mult.items():
            v[k] = m
        return v

    def degree(self) -> int:
        return sum(self.mult.values())

    def permute(self, perm: Sequence[int]) -> "Divisor":
        """Image under a permutation of the 32 labels (perm[old] = new)."""
        return Divisor({perm[k]: v for k, v in self.mult.items()})

    def to_json(self) -> dict:
        return {str(k): v for k, v in self.mult.items()}

    @classmethod
    def from_json(cls, doc: Mapping) -> "Divisor":
        out = {}
        for k, v in doc.items():
            lab = int(k)
            if not 0 <= lab < NLINES:
                raise ValueError(f"divisor label {k} out of range")
            out[lab] = int(v)
        return cls(out)


def hyperplane_divisor(I: Sequence[int], B: Sequence[int]) -> Divisor:
    """Sum of the 8 lines L_s with s_{i_j} = b_j (indices 1-based)."""
    I = tuple(int(i) for i in I)
    if len(I) != 3 or len(set(I)) != 3 or not all(1 <= i <= 6 for i in I) or len(B) != 3:
        raise ValueError("need three distinct indices in 1..6 and three bits")
    labs = set()
    for s in itertools.product((0, 1), repeat=6):
        if all(s[i - 1] == (b & 1) for i, b in zip(I, B)):
            labs.add(label(s))
    assert len(labs) == 8
    return Divisor.of(labs)


# --- lattice -------------------------------------------------------------------


@dataclass
class LineLattice:
    gram: IntMatrix
    rank: int
    V: list[list[int]]
    Vinv: list[list[int]]
    gram17: list[list[int]] = field(repr=False)

    def coords(self, v: Sequence[int]) -> list[int]:
        """Coordinates in the 17-element basis of the image of a 32-vector."""
        y = [sum(r[j] * v[j] for j in range(NLINES)) for r in self.Vinv]
        return y[: self.rank]

    def class_of(self, d: Divisor) -> list[int]:
        return self.coords(d.vector())

    def basis_divisors(self) -> list[Divisor]:
        return [Divisor({k: self.V[k][j] for k in range(NLINES)}) for j in range(self.rank)]

    def pairing(self, a: Divisor, b: Divisor) -> int:
        va, vb = a.vector(), b.vector()
        G = self.gram.rows
        return sum(va[i] * G[i][j] * vb[j] for i in range(NLINES) for j in range(NLINES) if va[i] and vb[j])

    def equal_classes(self, a: Divisor, b: Divisor) -> bool:
        diff = (a - b).vector()
        return all(sum(g * x for g, x in zip(row, diff)) == 0 for row in self.gram.rows)

    def action_matrix(self, perm: Sequence[int]) -> list[list[int]]:
        """Matrix on the 17-basis of the permutation perm[old label] = new label."""
        cols = []
        for j in range(self.rank):
            img = [0] * NLINES
            for k in range(NLINES):
                img[perm[k]] += self.V[k][j]
            y = [sum(r[i] * img[i] for i in range(NLINES)) for r in self.Vinv]
            cols.append(y[: self.rank])
        return [[cols[j][i] for j in range(self.rank)] for i in range(self.rank)]


@lru_cache(maxsize=1)
def gram_and_rank() -> LineLattice:
    G = IntMatrix(gram_matrix())
    U, S, V = smith_normal_form(G)
    rank = sum(1 for i in range(min(S.nrows, S.ncols)) if S[i, i])
    Vl = V.tolist()
    Vinv = [[int(x) for x in row] for row in inverse_q(Vl)]
    basis = [[Vl[k][j] for j in range(rank)] for k in range(NLINES)]
    g17 = [
        [sum(basis[a][i] * G[a, b] * basis[b][j] for a in range(NLINES) for b in range(NLINES)) for j in range(rank)]
        for i in range(rank)
    ]
    return LineLattice(G, rank, Vl, Vinv, g17)


# --- numeric branches and line coordinates ---------------------------------------


@dataclass
class Branches:
    """Roots r_1..r_6 of f and square roots z_i of delta(r_i), as balls."""

    r: list[Ball]
    z: list[Ball]
    dps: int
    log: list[str] = field(default_factory=list)
    z1_rational: tuple | None = None  # (a, b) with z1 = a + b r1 when that holds


def _poly_ball(poly: Poly, x: Ball) -> Ball:
    acc = Ball.exact(0)
    for c in reversed(poly.coeffs):
        acc = acc * x + Ball.exact(Fraction(c))
    return acc


def _principal(b: Ball) -> Ball:
    w = mpmath.sqrt(b.center)
    return b.sqrt_near(w)


def _root_balls(poly: Poly):
    cs = [Fraction(c) for c in poly.coeffs]
    rts = mpmath.polyroots([mp.mpf(c.numerator) / c.denominator for c in reversed(cs)], maxsteps=500, extraprec=4 * mp.dps)
    return poly_root_balls(cs, rts)


def _order(balls, eps):
    real = sorted((b for b in balls if abs(mp.im(b.center)) < eps), key=lambda b: -mp.re(b.center))
    cplx = sorted((b for b in balls if abs(mp.im(b.center)) >= eps), key=lambda b: (mp.im(b.center), mp.re(b.center)))
    return real, cplx


def compute_branches(c: Curve, d: EtaleElement, dps: int = 128) -> Branches:
    """Deterministic numeric roots and branches.

    Shape (quadratic)(cubic)(linear) orders r1, r2 from the quadratic (larger
    real root first), r3 real then r4, r5 from the cubic by imaginary part, and
    r6 the rational root.  Each z_i is the principal square root, except that
    z5 = -conj(z4) when r5 = conj(r4), so complex conjugation acts on the
    branches as the element ((0,0,1,1,1,1), (45)).
    """
    log = []
    with mp.workdps(dps):
        eps = mp.mpf(10) ** (-(dps // 3))
        shape = sorted(g.degree for g in c.factors) if c.factors else []
        conj_pair = False
        if shape == [1, 2, 3]:
            fac = {g.degree: g for g in c.factors}
            q_real, q_cplx = _order(_root_balls(fac[2]), eps)
            c_real, c_cplx = _order(_root_balls(fac[3]), eps)
            lin = fac[1]
            r6 = Ball.exact(-Fraction(lin.coeffs[0]) / Fraction(lin.coeffs[1]))
            roots = q_real + q_cplx + c_real + c_cplx + [r6]
            conj_pair = len(c_cplx) == 2
        else:
            real, cplx = _order(_root_balls(c.f), eps)
            roots = real + cplx
            log.append("generic root order: real roots descending then complex by imaginary part")
        zs = [_principal(_poly_ball(d.rep, r)) for r in roots]
        if conj_pair:
            r4, r5 = roots[3], roots[4]
            if r4.conjugate().overlaps(r5):
                zs[4] = -(zs[3].conjugate())
                log.append("z5 = -conj(z4)")
        for r, z in zip(roots, zs):
            res = z * z - _poly_ball(d.rep, r)
            if not res.contains_zero():
                raise ArithmeticError("branch check failed")
        prod = zs[0]
        for z in zs[1:]:
            prod = prod * z
        log.append(f"product of z_i = {mpmath.nstr(prod.center, 20)}")
        return Branches(roots, zs, dps, log)


def mulx_mod(vec: Sequence[Ball], f: Poly) -> list[Ball]:
    """Coefficients of x * v(x) mod f for a ball coefficient vector v."""
    n = f.degree
    lc = Fraction(f.lc())
    top = vec[n - 1]
    shifted = [Ball.exact(0)] + list(vec[: n - 1])
    return [shifted[k] - top * Ball.exact(Fraction(f.coeffs[k]) / lc) for k in range(n)]


def gamma(br: Branches, s: Sequence[int]) -> list[Ball]:
    """Coefficients of the degree-5 interpolant with gamma(r_i) = (-1)^{s_i} / z_i."""
    s = bits(s) if isinstance(s, int) else tuple(s)
    r = br.r
    n = len(r)
    with mp.workdps(br.dps):
        out = [Ball.exact(0) for _ in range(n)]
        for i in range(n):
            val = br.z[i].inverse() * (-1 if s[i] else 1)
            # Lagrange basis polynomial prod_{j != i} (x - r_j) / (r_i - r_j)
            num = [Ball.exact(1)]
            den = Ball.exact(1)
            for j in range(n):
                if j == i:
                    continue
                num = [Ball.exact(0)] + num
                for k in range(len(num) - 1):
                    num[k] = num[k] - r[j] * num[k + 1]
                den = den * (r[i] - r[j])
            scale = val / den
            for k in range(n):
                out[k] = out[k] + num[k] * scale
        return out


def line_coordinates(c: Curve, br: Branches, s) -> tuple[list[Ball], list[Ball]]:
    g = gamma(br, s)
    with mp.workdps(br.dps):
        return g, mulx_mod(g, c.f)


def eval_form_ball(form, pt: Sequence[Ball]) -> Ball:
    acc = Ball.exact(0)
    for e, coef in form.terms.items():
        t = Ball.exact(Fraction(coef))
        for x, k in zip(pt, e):
            for _ in range(k):
                t = t * x
        acc = acc + t
    return acc


def check_line_on_model(model, c: Curve, br: Branches, s) -> float:
    """Largest residual of the model forms at the two spanning points of L_s."""
    pts = line_coordinates(c, br, s)
    with mp.workdps(br.dps):
        worst = mp.mpf(0)
        for pt in pts:
            for q in model.forms:
                v = eval_form_ball(q, pt)
                if not v.contains_zero():
                    raise ArithmeticError(f"line {label(s)} misses the model")
                worst = max(worst, abs(v.center) + v.radius)
        return worst


def lines_meet(br: Branches, c: Curve, s1, s2) -> bool:
    """Numeric test: the four spanning vectors of two lines are dependent."""
    a = line_coordinates(c, br, s1)
    b = line_coordinates(c, br, s2)
    with mp.workdps(br.dps):
        M = mpmath.matrix([[x.center for x in v] for v in (*a, *b)])
        sv = mpmath.svd_c(M, compute_uv=False)
        small = min(abs(x) for x in sv)
        return small < mp.mpf(10) ** (-(br.dps // 2))


__all__ = [
    "normalize",
    "label",
    "bits",
    "intersection_number",
    "gram_matrix",
    "Divisor",
    "hyperplane_divisor",
    "LineLattice",
    "gram_and_rank",
    "Branches",
    "compute_branches",
    "gamma",
    "line_coordinates",
    "check_line_on_model",
    "lines_meet",
    "eval_form_ball",
]
