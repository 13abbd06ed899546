"""The surface V in P^5 cut out by three quadrics: construction, fibres mod p, lifting."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .arith import Form, Poly, monomials, prime_factors, primes_up_to
from .arith.linalg_q import rank_p, rank_q, solve_affine_p
from .etale import Curve, EtaleElement, norm_to_base

NV = 6


class LiftTreeCapExceeded(RuntimeError):
    def __init__(self, depth: int, width: int):
        super().__init__(f"lift tree width {width} exceeds cap at depth {depth}")
        self.depth = depth
        self.width = width


class NotSmoothError(ValueError):
    pass


@dataclass(frozen=True)
class QuadricModel:
    forms: tuple[Form, ...]
    provenance: str = "user-supplied"

    def __post_init__(self):
        forms = tuple(self.forms)
        if not forms:
            raise ValueError("model needs at least one form")
        nv = forms[0].nvars
        for q in forms:
            if q.degree != 2 or q.nvars != nv or not q.is_integral():
                raise ValueError("forms must be integral quadratic forms in a common set of variables")
        if rank_q([q.to_vector() for q in forms]) != len(forms):
            raise ValueError("forms are linearly dependent")
        object.__setattr__(self, "forms", forms)

    @property
    def nvars(self) -> int:
        return self.forms[0].nvars

    @classmethod
    def from_vectors(cls, vecs: Sequence[Sequence[int]], provenance="user-supplied", nvars: int = NV):
        return cls(tuple(Form.from_vector([int(c) for c in v], 2, nvars) for v in vecs), provenance)

    def vectors(self) -> list[list[int]]:
        return [[int(c) for c in q.to_vector()] for q in self.forms]

    def matrices(self) -> list[list[list[int]]]:
        return [q.matrix() for q in self.forms]

    def same_span(self, other: "QuadricModel") -> bool:
        a, b = self.vectors(), other.vectors()
        r = rank_q(a)
        return r == rank_q(b) == rank_q(a + b)

    def contains(self, point: Sequence, mod: int | None = None) -> bool:
        if mod is None:
            return all(q(point) == 0 for q in self.forms)
        return all(q.eval_mod(point, mod) == 0 for q in self.forms)

    def jacobian_rank(self, point: Sequence[int], p: int) -> int:
        J = [[g.eval_mod(point, p) for g in q.gradient()] for q in self.forms]
        return rank_p(J, p)


def build_quadrics(c: Curve, d: EtaleElement) -> QuadricModel:
    """Forms in a0..a5 whose vanishing says d(x) q(x)^2 mod f has degree <= 2.

    Ordered as the coefficients of x^5, x^4, x^3 and made primitive.
    """
    f = c.f
    nv = f.degree
    rems = {}
    for s in range(2 * nv - 1):
        rems[s] = (d.rep * Poly([0] * s + [1])) % f
    forms = []
    for k in range(nv - 1, 2, -1):
        terms = {}
        for i in range(nv):
            for j in range(i, nv):
                coef = rems[i + j][k] * (1 if i == j else 2)
                if coef:
                    e = [0] * nv
                    e[i] += 1
                    e[j] += 1
                    terms[tuple(e)] = coef
        forms.append(Form(terms, nv, 2).primitive())
    return QuadricModel(tuple(forms), "constructed-from-(f,delta)")


# --- points ------------------------------------------------------------------


@dataclass(frozen=True)
class ProjPoint:
    """Normalized projective point modulo p^k: the first unit coordinate is 1."""

    coords: tuple[int, ...]
    p: int
    k: int = 1

    def __post_init__(self):
        mod = self.p**self.k
        c = tuple(int(x) % mod for x in self.coords)
        lead = next((i for i, x in enumerate(c) if x % self.p), None)
        if lead is None:
            raise ValueError("all coordinates vanish mod p")
        inv = pow(c[lead], -1, mod)
        object.__setattr__(self, "coords", tuple(x * inv % mod for x in c))

    @property
    def lead(self) -> int:
        return next(i for i, x in enumerate(self.coords) if x % self.p)

    def reduce(self, k: int) -> "ProjPoint":
        return ProjPoint(self.coords, self.p, min(k, self.k))

    def __str__(self):
        return "(" + ":".join(str(x) for x in self.coords) + ")"


@dataclass
class FiberReport:
    p: int
    points: list[tuple[int, ...]]
    smooth: list[tuple[int, ...]]
    singular: list[tuple[int, ...]]
    ranks: dict = field(repr=False, default_factory=dict)

    @property
    def total(self) -> int:
        return len(self.points)

    def summary(self) -> dict:
        return {
            "p": self.p,
            "total": self.total,
            "smooth": len(self.smooth),
            "singular": [list(x) for x in self.singular],
        }


def _eval_terms_np(terms: dict, X: np.ndarray, p: int) -> np.ndarray:
    """Evaluate a form on the rows of X (int64, reduced mod p)."""
    out = np.zeros(X.shape[0], dtype=np.int64)
    for e, c in terms.items():
        t = np.full(X.shape[0], int(c) % p, dtype=np.int64)
        for i, k in enumerate(e):
            for _ in range(k):
                t = t * X[:, i] % p
        out = (out + t) % p
    return out


def _grid(p: int, r: int) -> np.ndarray:
    if r == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(p), repeat=r)), dtype=np.int64)


def _chart_points(model: QuadricModel, p: int, lead: int, chunk: int) -> list[tuple[int, ...]]:
    n = model.nvars
    free = list(range(lead + 1, n))
    forms = [q.terms for q in model.forms]
    if len(free) <= 2 or p == 2:
        # small chart: brute force over all free coordinates
        grid = _grid(p, len(free))
        X = np.zeros((len(grid), n), dtype=np.int64)
        X[:, lead] = 1
        if free:
            X[:, free] = grid
        ok = np.ones(len(X), dtype=bool)
        for t in forms:
            ok &= _eval_terms_np(t, X, p) == 0
        return [tuple(int(v) for v in row) for row in X[ok]]

    last = n - 1
    # split each form into A y^2 + B(x') y + C(x') in the last coordinate y
    split = []
    for t in forms:
        A = 0
        B, C = {}, {}
        for e, c in t.items():
            if e[last] == 2:
                A = int(c) % p
            elif e[last] == 1:
                B[e] = c
            else:
                C[e] = c
        Bt = {tuple(x if i != last else 0 for i, x in enumerate(e)): c for e, c in B.items()}
        split.append((A, Bt, C))
    # a combination with nonzero y^2 coefficient, if one exists
    pivot = next((k for k, s in enumerate(split) if s[0]), None)
    sq = np.full(p, -1, dtype=np.int64)
    for r in range(p - 1, -1, -1):
        sq[r * r % p] = r
    inv2 = pow(2, -1, p)

    outer = free[0]
    inner = free[1:-1]
    inner_grid = _grid(p, len(inner))
    found = []
    for a in range(p):
        X = np.zeros((len(inner_grid), n), dtype=np.int64)
        X[:, lead] = 1
        X[:, outer] = a
        if inner:
            X[:, inner] = inner_grid
        if pivot is None:
            cands = []
            for y in range(p):
                Y = X.copy()
                Y[:, last] = y
                cands.append(Y)
            Y = np.concatenate(cands)
        else:
            A, Bt, C = split[pivot]
            Bv = _eval_terms_np(Bt, X, p) if Bt else np.zeros(len(X), dtype=np.int64)
            Cv = _eval_terms_np(C, X, p) if C else np.zeros(len(X), dtype=np.int64)
            disc = (Bv * Bv - 4 * A % p * Cv) % p
            r = sq[disc]
            has = r >= 0
            inv2a = inv2 * pow(A, -1, p) % p
            X, Bv, r = X[has], Bv[has], r[has]
            y1 = (-Bv + r) % p * inv2a % p
            y2 = (-Bv - r) % p * inv2a % p
            Y1 = X.copy()
            Y1[:, last] = y1
            dbl = r != 0
            Y2 = X[dbl].copy()
            Y2[:, last] = y2[dbl]
            Y = np.concatenate([Y1, Y2])
        ok = np.ones(len(Y), dtype=bool)
        for k, t in enumerate(forms):
            if k != pivot:
                ok &= _eval_terms_np(t, Y, p) == 0
        found.extend(tuple(int(v) for v in row) for row in Y[ok])
    return found


def enumerate_fiber(model: QuadricModel, p: int, chunk: int = 1 << 20) -> FiberReport:
    """All F_p-points of the model, each classified by the rank of its Jacobian."""
    if p * p > (1 << 62) // 4:
        raise ValueError("prime too large for vectorised enumeration")
    for q in model.forms:
        if all(int(c) % p == 0 for c in q.terms.values()):
            raise ValueError(f"a form vanishes identically mod {p}")
    pts = []
    for lead in range(model.nvars):
        pts.extend(_chart_points(model, p, lead, chunk))
    pts = sorted(set(pts))
    smooth, singular, ranks = [], [], {}
    for P in pts:
        if not model.contains(P, p):
            raise AssertionError(f"enumeration produced a non-point {P}")
        r = model.jacobian_rank(P, p)
        ranks[P] = r
        (smooth if r == len(model.forms) else singular).append(P)
    return FiberReport(p, pts, smooth, singular, ranks)


def brute_force_fiber(model: QuadricModel, p: int) -> list[tuple[int, ...]]:
    """Naive enumeration over normalized representatives (small p only)."""
    n = model.nvars
    out = []
    for lead in range(n):
        for rest in itertools.product(range(p), repeat=n - lead - 1):
            P = (0,) * lead + (1,) + rest
            if model.contains(P, p):
                out.append(P)
    return sorted(out)


# --- lifting -------------------------------------------------------------------


def _newton_step(model: QuadricModel, x: list[int], p: int, j: int, lead: int):
    """Affine space of corrections t with Q(x + p^j t) = 0 mod p^(j+1), t_lead = 0."""
    mod = p ** (j + 1)
    vals = [q.eval_mod(x, mod) for q in model.forms]
    if any(v % p**j for v in vals):
        raise ValueError("point is not a solution modulo p^j")
    rhs = [(-(v // p**j)) % p for v in vals]
    cols = [i for i in range(model.nvars) if i != lead]
    J = [[g.eval_mod(x, p) for g in q.gradient()] for q in model.forms]
    A = [[row[c] for c in cols] for row in J]
    return cols, solve_affine_p(A, rhs, p)


def lift_smooth_point(model: QuadricModel, P: ProjPoint, k: int) -> ProjPoint:
    """Hensel lift of a smooth F_p-point to a normalized solution modulo p^k.

    The correction at every step is the particular solution with free
    coordinates set to zero, so the lift is deterministic.
    """
    p = P.p
    base = P.reduce(1)
    if model.jacobian_rank(base.coords, p) < len(model.forms):
        raise NotSmoothError(f"{base} is singular mod {p}")
    x = list(P.coords)
    lead = base.lead
    for j in range(P.k, k):
        cols, sol = _newton_step(model, x, p, j, lead)
        if sol is None:
            raise AssertionError("smooth point failed to lift")
        t = sol[0]
        for c, tc in zip(cols, t):
            x[c] = x[c] + p**j * tc
    out = ProjPoint(x, p, k)
    assert model.contains(out.coords, p**k)
    return out


@dataclass
class LiftTree:
    point: ProjPoint
    sizes: list[int]
    survivors: list[tuple[int, ...]]
    depth: int

    @property
    def dead(self) -> bool:
        return not self.survivors


def explore_lift_tree(model: QuadricModel, P: ProjPoint, depth: int, cap: int = 10**7) -> LiftTree:
    """All normalized residue classes mod p^depth above P that solve the forms.

    A class mod p^j has children x + p^j t with t solving a linear system mod p,
    because Q(x + p^j t) = Q(x) + p^j grad Q(x).t mod p^(j+1).
    """
    p = P.p
    base = P.reduce(1)
    lead = base.lead
    level = [list(base.coords)]
    sizes = [1]
    for j in range(1, depth):
        nxt = []
        for x in level:
            cols, sol = _newton_step(model, x, p, j, lead)
            if sol is None:
                continue
            part, ker = sol
            width = p ** len(ker)
            if len(nxt) + width > cap:
                raise LiftTreeCapExceeded(j + 1, len(nxt) + width)
            for coeffs in itertools.product(range(p), repeat=len(ker)):
                t = [(a + sum(c * v[i] for c, v in zip(coeffs, ker))) % p for i, a in enumerate(part)]
                y = list(x)
                for c, tc in zip(cols, t):
                    y[c] = (y[c] + p**j * tc) % p ** (j + 1)
                nxt.append(y)
        level = nxt
        sizes.append(len(level))
        if not level:
            return LiftTree(base, sizes, [], j + 1)
    return LiftTree(base, sizes, sorted(tuple(x) for x in level), depth)


# --- bad primes ---------------------------------------------------------------


@dataclass
class BadPrimeReport:
    primes: list[int]
    method: str
    sources: dict

    def __iter__(self):
        return iter(self.primes)


def bad_primes(
    model: QuadricModel,
    hints: Iterable[int] | None = None,
    bound: int = 13,
    curve: Curve | None = None,
    delta: EtaleElement | None = None,
    certified: bool = False,
) -> BadPrimeReport:
    """Union of hinted primes, small primes with a singular fibre point, and arithmetic primes."""
    sources: dict = {}
    found: set[int] = set()
    for p in hints or ():
        found.add(int(p))
        sources.setdefault(int(p), []).append("hint")
    for p in primes_up_to(bound):
        try:
            rep = enumerate_fiber(model, p)
        except ValueError:
            found.add(p)
            sources.setdefault(p, []).append("degenerate form")
            continue
        if rep.singular:
            found.add(p)
            sources.setdefault(p, []).append("singular fibre point")
    if curve is not None:
        from .arith import discriminant

        for q in prime_factors(discriminant(curve.f)):
            found.add(q)
            sources.setdefault(q, []).append("disc(f)")
        if delta is not None:
            nm = norm_to_base(delta)
            for q in prime_factors(nm):
                found.add(q)
                sources.setdefault(q, []).append("norm(delta)")
    method = "certified-hints" if certified and hints is not None else "heuristic"
    return BadPrimeReport(sorted(found), method, sources)


__all__ = [
    "QuadricModel",
    "ProjPoint",
    "FiberReport",
    "LiftTree",
    "LiftTreeCapExceeded",
    "NotSmoothError",
    "build_quadrics",
    "enumerate_fiber",
    "brute_force_fiber",
    "lift_smooth_point",
    "explore_lift_tree",
    "bad_primes",
    "monomials",
]
