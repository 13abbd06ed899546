"""Zero-dimensional slices of V by 3-planes and the algebra of their 8 points.

Restricting the three quadrics to a 3-plane x = t0 v0 + ... + t3 v3 gives a
complete intersection in P^3 of degree 8.  Its coordinate ring R = S/I has
R_d of dimension 8 for d >= 3, and multiplication by a form of degree e is a
linear map R_3 -> R_(3+e) whose determinant, divided by that of t0^e,
is the norm of the form (dehomogenised at t0 = 1) over the 8 points.  The
same linear algebra over F_p yields multiplication matrices whose common
eigenvectors are the F_p-points of the slice.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from cypari import pari

from .arith import Form, monomials
from .surface import QuadricModel

NT = 4
DEG = 8
STACK = 1 << 30


def _ensure_stack() -> None:
    if pari.stacksize() < STACK:
        pari.allocatemem(STACK, silent=True)


class DegenerateSlice(ValueError):
    """The 3-plane meets V badly (not 8 reduced points, or a point with t0 = 0)."""


def restrict(form: Form, vectors: Sequence[Sequence[int]]) -> Form:
    """Pull a form back along x = sum_k t_k vectors[k]."""
    lin = [Form.linear([vectors[k][i] for k in range(NT)]) for i in range(form.nvars)]
    out = Form({}, NT, form.degree)
    for e, c in form.terms.items():
        term = Form({(0,) * NT: c}, NT, 0)
        for i, m in enumerate(e):
            for _ in range(m):
                term = term * lin[i]
        out = out + term
    return out


def _vec(form: Form) -> list:
    return form.to_vector()


def _mon_form(e) -> Form:
    return Form({tuple(e): 1}, NT, sum(e))


class _Graded:
    """Coordinates on R_d = S_d / I_d for the restricted ideal (over Q or F_p)."""

    def __init__(self, quads: Sequence[Form], d: int, p: int | None):
        _ensure_stack()
        self.d = d
        self.p = p
        mons = monomials(d, NT)
        gens = [_vec(q * _mon_form(m)) for q in quads for m in monomials(d - 2, NT)]
        X = self._mat([[g[i] for g in gens] for i in range(len(mons))])  # columns = generators
        idx = pari.matindexrank(X)[1]
        self.rank = len(idx)
        self.dim = len(mons) - self.rank
        self.S = pari.matsupplement(self._cols(X, idx))
        self.Sinv = self.S**-1

    def _mat(self, rows):
        m, n = len(rows), len(rows[0])
        flat = [self._conv(x) for r in rows for x in r]
        return pari.matrix(m, n, flat)

    def _conv(self, x):
        x = Fraction(x)
        if self.p is None:
            return pari(f"{x.numerator}/{x.denominator}")
        return pari.Mod(x.numerator * pow(x.denominator, -1, self.p), self.p)

    def _cols(self, X, idx):
        cols = [int(j) for j in idx]
        m = pari.matsize(X)[0]
        return pari.matrix(m, len(cols), [X[i, j - 1] for i in range(int(m)) for j in cols])

    def coords(self, vec: Sequence) -> list:
        """Quotient coordinates of a degree-d coefficient vector."""
        v = pari.Col([self._conv(x) for x in vec])
        y = self.Sinv * v
        return [y[self.rank + k] for k in range(self.dim)]

    def basis(self) -> list[tuple[int, ...]]:
        """Monomials whose classes form the basis (the supplementing unit vectors)."""
        mons = monomials(self.d, NT)
        out = []
        for k in range(self.rank, self.rank + self.dim):
            col = [self.S[i, k] for i in range(len(mons))]
            j = next(i for i, x in enumerate(col) if x != 0)
            out.append(mons[j])
        return out


@dataclass
class Slice:
    """V cut by a 3-plane, as the degree-8 algebra of its points."""

    vectors: list[list[int]]
    quads: list[Form]
    p: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def graded(self, d: int) -> _Graded:
        if d not in self._cache:
            self._cache[d] = _Graded(self.quads, d, self.p)
        return self._cache[d]

    def check(self) -> None:
        for d in (3, 4):
            if self.graded(d).dim != DEG:
                raise DegenerateSlice(f"R_{d} has dimension {self.graded(d).dim}")

    def multiplication(self, form: Form) -> object:
        """Matrix of multiplication by a form R_3 -> R_(3+deg)."""
        R3, Rt = self.graded(3), self.graded(3 + form.degree)
        cols = [Rt.coords(_vec(form * _mon_form(m))) for m in R3.basis()]
        return pari.matrix(DEG, DEG, [cols[j][i] for i in range(DEG) for j in range(DEG)])

    def t0_power(self, e: int) -> Form:
        return Form({(e, 0, 0, 0): 1}, NT, e)

    def norm(self, form: Form):
        """Product over the 8 points of form(1, t1, t2, t3)."""
        A = self.multiplication(form)
        B = self.multiplication(self.t0_power(form.degree))
        dB = pari.matdet(B)
        if dB == 0:
            raise DegenerateSlice("t0 vanishes at a point of the slice")
        return pari.matdet(A) / dB

    def affine_operators(self) -> list:
        """Matrices of t_k / t0 (k = 1, 2, 3) acting on R_3."""
        T0 = self.multiplication(Form.linear([1, 0, 0, 0]))
        if pari.matdet(T0) == 0:
            raise DegenerateSlice("t0 is a zero divisor")
        T0i = T0**-1
        return [T0i * self.multiplication(Form.linear([int(i == k) for i in range(NT)])) for k in (1, 2, 3)]

    def charpoly(self):
        """Characteristic polynomial of t1/t0 (the minimal polynomial when squarefree)."""
        return pari.charpoly(self.affine_operators()[0])

    def rational_points(self) -> list[tuple[int, ...]]:
        """F_p-points of the slice, as coordinate vectors in P^5 (p must be set)."""
        if self.p is None:
            raise ValueError("rational_points needs a prime")
        p = self.p
        M1, M2, M3 = self.affine_operators()
        cp = pari.charpoly(M1)
        out = []
        for root in pari.polrootsmod(pari.lift(cp), p):
            lam = int(pari.lift(root))
            K = pari.matker(pari.mattranspose(M1) - pari.Mod(lam, p) * pari.matid(DEG))
            if int(pari.matsize(K)[1]) != 1:
                continue  # repeated eigenvalue: skip, another slice will do
            w = [K[i, 0] for i in range(DEG)]
            j = next(i for i, x in enumerate(w) if x != 0)
            ts = [1, lam]
            for M in (M2, M3):
                img = pari.mattranspose(M) * pari.Col(w)
                ts.append(int(pari.lift(img[j] / w[j])))
            x = [sum(ts[k] * self.vectors[k][i] for k in range(NT)) % p for i in range(len(self.vectors[0]))]
            if any(x):
                out.append(tuple(x))
        return out


def random_slice(model: QuadricModel, rng: random.Random, p: int | None = None, span: int = 5, tries: int = 20) -> Slice:
    for _ in range(tries):
        vecs = [[rng.randint(-span, span) for _ in range(model.nvars)] for _ in range(NT)]
        if p is not None:
            vecs = [[x % p for x in v] for v in vecs]
        quads = [restrict(q, vecs) for q in model.forms]
        s = Slice(vecs, quads, p)
        try:
            s.check()
            s.affine_operators()
            return s
        except DegenerateSlice:
            continue
    raise DegenerateSlice("no nondegenerate slice found")


def slice_norms(model: QuadricModel, F: Form, count: int = 3, seed: int = 0) -> list[tuple[list[list[int]], Fraction]]:
    """Norms N(F(P)) over the points P of several random rational slices."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        s = random_slice(model, rng)
        try:
            n = s.norm(restrict(F, s.vectors))
        except DegenerateSlice:
            continue
        if n == 0:
            continue
        out.append((s.vectors, Fraction(int(pari.numerator(n)), int(pari.denominator(n)))))
    return out


def point_mod_p(model: QuadricModel, p: int, seed: int = 0, tries: int = 40, smooth: bool = True) -> tuple[int, ...]:
    """An F_p-point of V (smooth if requested), via eigenvectors of a random slice."""
    rng = random.Random(seed)
    for _ in range(tries):
        s = random_slice(model, rng, p, span=p - 1)
        for x in s.rational_points():
            if not model.contains(x, p):
                continue
            if smooth and model.jacobian_rank(x, p) < len(model.forms):
                continue
            return x
    raise LookupError(f"no F_{p}-point found in {tries} slices")


__all__ = ["Slice", "DegenerateSlice", "restrict", "random_slice", "slice_norms", "point_mod_p"]
