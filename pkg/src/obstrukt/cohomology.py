"""Aut(Gamma) = G_Gamma x| S_6, its action on the line lattice, and H^1 of subgroups."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .arith import IntMatrix, Poly, elementary_divisors, integer_kernel, solve_integer
from .etale import Curve, EtaleElement, is_rational_square
from .lines import Divisor, LineLattice, bits, gram_and_rank, label, normalize


@dataclass(frozen=True)
class AutElement:
    """(t, pi) acting on line indices by s -> pi(s) + t.

    ``perm`` is one-line notation: perm[i-1] = pi(i).
    """

    t: tuple[int, ...]
    perm: tuple[int, ...] = (1, 2, 3, 4, 5, 6)

    def __post_init__(self):
        t = normalize(self.t)
        perm = tuple(int(x) for x in self.perm)
        if sorted(perm) != [1, 2, 3, 4, 5, 6]:
            raise ValueError(f"{self.perm} is not a permutation of 1..6")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "perm", perm)

    @classmethod
    def translation(cls, t) -> "AutElement":
        return cls(tuple(t))

    @classmethod
    def cycle(cls, *cycles: Sequence[int]) -> "AutElement":
        perm = list(range(1, 7))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                perm[a - 1] = b
        return cls((0,) * 6, tuple(perm))

    def permute_bits(self, s: Sequence[int]) -> tuple[int, ...]:
        out = [0] * 6
        for i, b in enumerate(s):
            out[self.perm[i] - 1] = b
        return tuple(out)

    def act(self, s: Sequence[int]) -> tuple[int, ...]:
        ps = self.permute_bits(s)
        return normalize(tuple(a ^ b for a, b in zip(ps, self.t)))

    def __mul__(self, other: "AutElement") -> "AutElement":
        t = tuple(a ^ b for a, b in zip(self.t, self.permute_bits(other.t)))
        perm = tuple(self.perm[other.perm[i] - 1] for i in range(6))
        return AutElement(t, perm)

    def inverse(self) -> "AutElement":
        inv = [0] * 6
        for i, j in enumerate(self.perm):
            inv[j - 1] = i + 1
        pinv = AutElement((0,) * 6, tuple(inv))
        return AutElement(pinv.permute_bits(self.t), tuple(inv))

    @property
    def is_identity(self) -> bool:
        return self.t == (0,) * 6 and self.perm == (1, 2, 3, 4, 5, 6)

    def line_permutation(self) -> tuple[int, ...]:
        """perm32[label] = label of the image line."""
        return tuple(label(self.act(bits(k))) for k in range(32))

    def to_json(self) -> dict:
        return {"t": list(self.t), "perm": "".join(map(str, self.perm))}

    @classmethod
    def from_json(cls, doc) -> "AutElement":
        perm = doc.get("perm", [1, 2, 3, 4, 5, 6])
        if isinstance(perm, str):
            perm = [int(ch) for ch in perm.replace(",", " ").split()] if " " in perm or "," in perm else [int(ch) for ch in perm]
        return cls(tuple(int(b) for b in doc.get("t", [0] * 6)), tuple(perm))

    def __repr__(self):
        return f"Aut(t={''.join(map(str, self.t))}, perm={''.join(map(str, self.perm))})"


IDENTITY = AutElement((0,) * 6)


@dataclass
class SubgroupSpec:
    generators: list[AutElement]
    elements: list[AutElement] = field(default_factory=list)
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: AutElement) -> bool:
        return g in set(self.elements)

    def to_json(self) -> list:
        return [g.to_json() for g in self.generators]


def closure(gens: Iterable[AutElement], name: str = "") -> SubgroupSpec:
    gens = list(gens)
    seen = {IDENTITY}
    order = [IDENTITY]
    queue = deque([IDENTITY])
    while queue:
        h = queue.popleft()
        for s in gens:
            g = s * h
            if g not in seen:
                seen.add(g)
                order.append(g)
                queue.append(g)
    if 23040 % len(order):
        raise AssertionError("closure order does not divide |Aut|")
    return SubgroupSpec(gens, order, name)


def verify_closed(H: SubgroupSpec) -> bool:
    els = set(H.elements)
    return all(a * b in els for a in H.elements for b in H.elements)


def all_aut_elements() -> list[AutElement]:
    out = []
    for t in itertools.product((0, 1), repeat=5):
        for perm in itertools.permutations(range(1, 7)):
            out.append(AutElement((0,) + t, perm))
    return out


def is_faithful(elements: Sequence[AutElement]) -> bool:
    return len({g.line_permutation() for g in elements}) == len(set(elements))


def even_subgroup_order() -> int:
    """Order of the index-2 subgroup with translation part of even weight."""
    return sum(1 for g in all_aut_elements() if sum(g.t) % 2 == 0)


# --- named subgroups -------------------------------------------------------------

H96_GENERATORS = (
    AutElement((0, 0, 1, 0, 0, 1)),
    AutElement((0, 0, 1, 1, 1, 1)),
    AutElement.cycle((1, 2)),
    AutElement.cycle((3, 4, 5)),
    AutElement.cycle((3, 4)),
)
SIGMA = AutElement((0, 0, 1, 1, 1, 1))


@lru_cache(maxsize=1)
def h96() -> SubgroupSpec:
    return closure(H96_GENERATORS, "H96")


@lru_cache(maxsize=1)
def h48() -> SubgroupSpec:
    """Elements of H96 fixing z6: translation part (with t1 = 0) has t6 = 0."""
    els = [g for g in h96().elements if g.t[5] == 0]
    gens = _generators_of(els)
    H = closure(gens, "H48")
    assert set(H.elements) == set(els)
    return H


@lru_cache(maxsize=1)
def h12() -> SubgroupSpec:
    gens = (
        AutElement((0, 0, 1, 1, 0, 0)) * AutElement.cycle((3, 4)),
        AutElement.cycle((1, 2)),
        AutElement.cycle((4, 5)),
    )
    return closure(gens, "H12")


def trivial_group() -> SubgroupSpec:
    return SubgroupSpec([], [IDENTITY], "1")


def _generators_of(els: Sequence[AutElement]) -> list[AutElement]:
    gens: list[AutElement] = []
    span = {IDENTITY}
    for g in els:
        if g not in span:
            gens.append(g)
            span = set(closure(gens).elements)
    return gens


# --- lattice action and H^1 -------------------------------------------------------


def lattice_action(g: AutElement, lat: LineLattice | None = None) -> list[list[int]]:
    lat = lat or gram_and_rank()
    return lat.action_matrix(g.line_permutation())


def preserves_gram(M: Sequence[Sequence[int]], lat: LineLattice | None = None) -> bool:
    lat = lat or gram_and_rank()
    G = lat.gram17
    n = len(G)
    MT_G = [[sum(M[k][i] * G[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return all(sum(MT_G[i][k] * M[k][j] for k in range(n)) == G[i][j] for i in range(n) for j in range(n))


def _matvec(M, v):
    return [sum(a * b for a, b in zip(row, v)) for row in M]


@dataclass
class CohomologyResult:
    group: str
    order: int
    invariants: list[int]  # elementary divisors > 1 of H^1
    free_rank: int
    cocycle: dict | None = None  # element -> lattice vector, for a generator of the first cyclic factor
    log: list[str] = field(default_factory=list)

    def describe(self) -> str:
        parts = [f"Z/{d}" for d in self.invariants] + (["Z"] * self.free_rank)
        return " x ".join(parts) if parts else "0"


def _tree(H: SubgroupSpec):
    """BFS words: for each element g != 1 a pair (generator index, predecessor) with g = s * h."""
    parent = {IDENTITY: None}
    order = [IDENTITY]
    queue = deque([IDENTITY])
    while queue:
        h = queue.popleft()
        for k, s in enumerate(H.generators):
            g = s * h
            if g not in parent:
                parent[g] = (k, h)
                order.append(g)
                queue.append(g)
    return parent, order


def _independent_rows(A: np.ndarray, p: int = 2_147_483_629) -> list[int]:
    """Indices of rows of A that are independent modulo p (hence over Q)."""
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    keep = []
    for idx, row in enumerate(A % p):
        r = row.astype(object)
        for b, c in zip(basis, pivots):
            if r[c]:
                r = (r - r[c] * b) % p
        nz = np.nonzero(r)[0]
        if len(nz):
            c = int(nz[0])
            r = r * pow(int(r[c]), -1, p) % p
            for k, b in enumerate(basis):
                if b[c]:
                    basis[k] = (b - b[c] * r) % p
            basis.append(r)
            pivots.append(c)
            keep.append(idx)
            if len(keep) == A.shape[1]:
                break
    return keep


def exact_kernel(A: np.ndarray) -> list[list[int]]:
    """Saturated integer kernel of a tall integer matrix.

    The Z-kernel depends only on the Q-row space, so a row subset that is
    independent modulo a large prime is used; the result is then checked
    against every row, which makes it exact whatever the prime.
    """
    nun = A.shape[1]
    if A.shape[0] == 0:
        return [[int(i == j) for i in range(nun)] for j in range(nun)]
    keep = _independent_rows(A)
    K = integer_kernel(IntMatrix([[int(x) for x in A[i]] for i in keep], nun))
    if K:
        Km = np.array(K, dtype=object).T
        if np.any(A.astype(object) @ Km):
            raise AssertionError("modular row selection missed a relation")
    return K


def h1_lattice(H: SubgroupSpec, lat: LineLattice | None = None) -> CohomologyResult:
    """H^1(H, Z^17) from a cocycle system in the values on generators.

    A cocycle is determined by its generator values; walking a BFS tree of
    the Cayley graph expresses every c(g) linearly in them, and every
    non-tree edge gives a linear constraint.  Coboundaries are then quotiented
    out via Smith normal form.
    """
    lat = lat or gram_and_rank()
    n = lat.rank
    if not verify_closed(H):
        raise ValueError("subgroup is not closed")
    gens = H.generators
    if H.order == 1 or not gens:
        return CohomologyResult(H.name, H.order, [], 0, None, ["trivial group"])
    m = len(gens)
    nun = m * n
    mats = {g: np.array(lattice_action(g, lat), dtype=np.int64) for g in H.elements}
    parent, order = _tree(H)
    # expr[g]: n x nun integer matrix with c(g) = expr[g] @ unknowns
    gen_expr = []
    for k in range(m):
        E = np.zeros((n, nun), dtype=np.int64)
        E[:, k * n : (k + 1) * n] = np.eye(n, dtype=np.int64)
        gen_expr.append(E)
    expr = {IDENTITY: np.zeros((n, nun), dtype=np.int64)}

    def combine(k, h):
        # c(s h) = c(s) + s c(h)
        return gen_expr[k] + mats[gens[k]] @ expr[h]

    for g in order[1:]:
        k, h = parent[g]
        expr[g] = combine(k, h)
    blocks = [expr[s * h] - combine(k, h) for h in order for k, s in enumerate(gens)]
    A = np.unique(np.vstack(blocks), axis=0)
    A = A[np.any(A != 0, axis=1)]
    K = exact_kernel(A)
    r = len(K)
    Kmat = IntMatrix([[K[j][i] for j in range(r)] for i in range(nun)])  # nun x r
    # coboundary generators in Z^1 coordinates
    cols = []
    for e in range(n):
        b = []
        for k in range(m):
            col = [int(x) for x in mats[gens[k]][:, e]]
            col[e] -= 1
            b.extend(col)
        x = solve_integer(Kmat, b)
        if x is None:
            raise AssertionError("coboundary outside the cocycle lattice")
        cols.append(x)
    B = IntMatrix([[cols[j][i] for j in range(n)] for i in range(r)])  # r x n
    nonzero = elementary_divisors(B)
    invariants = [d for d in nonzero if d > 1]
    free = r - len(nonzero)
    cocycle = None
    log = [f"{len(A)} distinct edge constraints, cocycle lattice rank {r}"]
    if invariants or free:
        # a basis cocycle outside the coboundaries represents a nonzero class
        j = next(j for j in range(r) if solve_integer(B, [int(i == j) for i in range(r)]) is None)
        unknowns = np.array(K[j], dtype=np.int64)
        cocycle = {g: [int(v) for v in expr[g] @ unknowns] for g in order}
        if not check_cocycle(H, cocycle, mats):
            raise AssertionError("cocycle identity fails")
        if is_coboundary(H, cocycle, mats):
            raise AssertionError("representative cocycle is a coboundary")
    return CohomologyResult(H.name, H.order, invariants, free, cocycle, log)


def _mats(H: SubgroupSpec, mats: dict | None) -> dict:
    if mats is None:
        mats = {g: lattice_action(g) for g in H.elements}
    return {g: np.asarray(M, dtype=np.int64) for g, M in mats.items()}


def check_cocycle(H: SubgroupSpec, c: dict, mats: dict | None = None) -> bool:
    """c(gh) = c(g) + g c(h) on all |H|^2 pairs."""
    mats = _mats(H, mats)
    cv = {g: np.asarray(c[g], dtype=np.int64) for g in H.elements}
    for g in H.elements:
        for h in H.elements:
            if not np.array_equal(cv[g * h], cv[g] + mats[g] @ cv[h]):
                return False
    return True


def is_coboundary(H: SubgroupSpec, c: dict, mats: dict | None = None) -> bool:
    """Is there m in Z^17 with c(g) = g m - m for every g in H.

    For a cocycle it is enough to test the generators.
    """
    mats = _mats(H, mats)
    n = len(next(iter(c.values())))
    test = list(H.generators) or list(H.elements)
    rows, rhs = [], []
    for g in test:
        M = mats[g]
        for i in range(n):
            rows.append([int(M[i][j]) - int(i == j) for j in range(n)])
            rhs.append(int(c[g][i]))
    return solve_integer(IntMatrix(rows), rhs) is not None


# --- the distinguished class and the coset table -------------------------------------

E_DIVISOR = Divisor.of([6, 7], [8, 9])


def distinguished_class(lat: LineLattice | None = None) -> dict:
    """The class d with sigma d = d on H48 and sigma d = -d off it, verified."""
    lat = lat or gram_and_rank()
    d = lat.class_of(E_DIVISOR)
    fixed, negated = [], []
    H48 = set(h48().elements)
    for g in h96().elements:
        img = _matvec(lattice_action(g, lat), d)
        if g in H48:
            if img != d:
                raise AssertionError(f"{g} does not fix d")
            fixed.append(g)
        else:
            if img != [-x for x in d]:
                raise AssertionError(f"{g} does not negate d")
            negated.append(g)
    return {"divisor": E_DIVISOR, "class": d, "fixed": len(fixed), "negated": len(negated)}


COSET_REPRESENTATIVES = (
    AutElement((0,) * 6),
    AutElement((0, 0, 1, 1, 0, 0)),
    AutElement((0, 0, 0, 1, 1, 0)),
    AutElement((0, 0, 1, 0, 1, 0)),
)

# the divisors of h / tau h for each coset, as displayed alongside the construction
COSET_DIVISORS = (
    Divisor(),
    Divisor.of([4, 5, 6, 7], [8, 9, 10, 11]),
    Divisor.of([6, 7, 14, 15], [0, 1, 8, 9]),
    Divisor.of([2, 3, 6, 7], [8, 9, 12, 13]),
)


def coset_divisor_table(lat: LineLattice | None = None) -> dict:
    """Map coset representative -> divisor E - tau E, checked on the whole coset."""
    lat = lat or gram_and_rank()
    H12 = h12()
    if H12.order != 12 or h48().order % 12 or h48().order // 12 != 4:
        raise AssertionError("H12 is not of index 4 in H48")
    H48 = set(h48().elements)
    covered = set()
    table = {}
    for rep, expected in zip(COSET_REPRESENTATIVES, COSET_DIVISORS):
        coset = {rep * h for h in H12.elements}
        if not coset <= H48:
            raise AssertionError("coset leaves H48")
        covered |= coset
        for tau in coset:
            got = E_DIVISOR - E_DIVISOR.permute(tau.line_permutation())
            if got != expected:
                raise AssertionError(f"E - tau E differs from the table for {tau}")
        table[rep] = expected
    if covered != H48:
        raise AssertionError("coset decomposition failure")
    return table


# --- arithmetic containment -------------------------------------------------------------


def sqrt_in_quadratic_field(g: Poly, v: Poly) -> tuple[Fraction, Fraction] | None:
    """(a, b) with (a + b x)^2 = v mod g for a monic-able quadratic g, or None."""
    g = g.monic()
    w, u = Fraction(g[0]), Fraction(g[1])
    v = v % g
    v0, v1 = Fraction(v[0]), Fraction(v[1])
    # b = 0
    if v1 == 0 and is_rational_square(v0):
        return _qsqrt(v0), Fraction(0)
    # (u^2 - 4w) B^2 + (2 u v1 - 4 v0) B + v1^2 = 0 with B = b^2
    A2, A1, A0 = u * u - 4 * w, 2 * u * v1 - 4 * v0, v1 * v1
    cands = []
    if A2 == 0:
        if A1:
            cands.append(-A0 / A1)
    else:
        disc = A1 * A1 - 4 * A2 * A0
        if disc >= 0 and is_rational_square(disc):
            sd = _qsqrt(disc)
            cands += [(-A1 + sd) / (2 * A2), (-A1 - sd) / (2 * A2)]
    for B in cands:
        if B > 0 and is_rational_square(B):
            b = _qsqrt(B)
            a = (v1 + u * B) / (2 * b)
            if a * a - w * b * b == v0 and 2 * a * b - u * b * b == v1:
                return a, b
    return None


def _qsqrt(q: Fraction) -> Fraction:
    from math import isqrt

    return Fraction(isqrt(q.numerator), isqrt(q.denominator))


def _irreducible_small(g: Poly) -> bool:
    if g.degree == 1:
        return True
    if g.degree == 2:
        a, b, c = (Fraction(x) for x in (g[2], g[1], g[0]))
        return not is_rational_square(b * b - 4 * a * c)
    if g.degree == 3:
        from cypari import pari

        coeffs = ",".join(str(Fraction(x)) for x in reversed(g.coeffs))
        return bool(pari(f"polisirreducible(Pol([{coeffs}]))"))
    return False


def galois_containment(c: Curve, d: EtaleElement):
    """H96 when f = (quadratic)(cubic)(linear) and delta(r1) is a square in Q(r1)."""
    if not c.factors or sorted(g.degree for g in c.factors) != [1, 2, 3]:
        return "not applicable"
    if not all(_irreducible_small(g) for g in c.factors):
        return "not applicable"
    quad = next(g for g in c.factors if g.degree == 2)
    if sqrt_in_quadratic_field(quad, d.rep) is None:
        return "not applicable"
    return h96()


__all__ = [
    "AutElement",
    "SubgroupSpec",
    "CohomologyResult",
    "closure",
    "verify_closed",
    "all_aut_elements",
    "is_faithful",
    "h96",
    "h48",
    "h12",
    "trivial_group",
    "lattice_action",
    "preserves_gram",
    "h1_lattice",
    "check_cocycle",
    "is_coboundary",
    "distinguished_class",
    "coset_divisor_table",
    "galois_containment",
    "sqrt_in_quadratic_field",
    "SIGMA",
    "E_DIVISOR",
]
