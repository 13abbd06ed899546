"""Valuations of a form on all Z_p-points above a singular residue class.

The residue disc above a normalized point is covered by cells
x = x0 + s*t (t in Z_p^5, the leading coordinate fixed at 1).  On a cell
the quadrics become integral polynomials in t; after dividing out their
p-content they cut out the same locus.  Reducing F modulo the module they
generate (degree <= 2 multipliers) gives R with F = R on the cell, so on a
subcell t = a mod p with R/p^c nonzero at a the valuation of F is exactly
c.  Subcells where R/p^c vanishes are refined recursively.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .arith import Form
from .surface import ProjPoint, QuadricModel

_NFREE = 5


@lru_cache(maxsize=None)
def _mons(deg: int) -> tuple[tuple[int, ...], ...]:
    return tuple(e for e in itertools.product(range(deg + 1), repeat=_NFREE) if sum(e) <= deg)


@lru_cache(maxsize=None)
def _index(deg: int) -> dict:
    return {e: k for k, e in enumerate(_mons(deg))}


def _vp(n: int, p: int) -> int:
    if n == 0:
        return 1 << 30
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def expand_at(form: Form, x0, lead: int, scale: int) -> dict:
    """Exact coefficients of form(x0 + scale*t) in the five free coordinates t."""
    free = [i for i in range(form.nvars) if i != lead]
    out: dict = {}
    for m, c in form.terms.items():
        parts = [((0,) * _NFREE, int(c) * x0[lead] ** m[lead])]
        for k, j in enumerate(free):
            e = m[j]
            if not e:
                continue
            opts = [(r, comb(e, r) * x0[j] ** (e - r) * scale**r) for r in range(e + 1)]
            nxt = []
            for ex, cc in parts:
                for r, coef in opts:
                    if coef:
                        ee = list(ex)
                        ee[k] += r
                        nxt.append((tuple(ee), cc * coef))
            parts = nxt
        for ex, cc in parts:
            out[ex] = out.get(ex, 0) + cc
    return out


def _dense(d: dict, deg: int) -> list[int]:
    return [d.get(e, 0) for e in _mons(deg)]


def _times_monomial(vec2, m) -> list:
    out = [0] * len(_mons(4))
    idx = _index(4)
    for e, c in zip(_mons(2), vec2):
        if c:
            out[idx[tuple(a + b for a, b in zip(e, m))]] = c
    return out


def _local_echelon(rows: list[list[int]], p: int, mod: int):
    """Full-pivot elimination over Z_(p) (mod p^N); yields (valuation, row / p^v)."""
    A = [[x % mod for x in r] for r in rows]
    out = []
    while A:
        best = None
        for i, r in enumerate(A):
            for c, x in enumerate(r):
                if x:
                    v = _vp(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, c)
        if best is None:
            break
        v, i, c = best
        r = A.pop(i)
        uinv = pow(r[c] // p**v, -1, mod)
        for k in range(len(A)):
            if A[k][c]:
                f = (A[k][c] // p**v) * uinv % mod
                A[k] = [(a - f * b) % mod for a, b in zip(A[k], r)]
        out.append((v, [x // p**v for x in r]))
    return out


def _reduce_module(gens: list[list[int]], F: list[int], p: int, mod: int) -> list[int]:
    A = np.array(gens, dtype=object) % mod
    R = np.array(F, dtype=object) % mod
    alive = list(range(len(A)))
    while alive:
        best = None
        for r in alive:
            for c in np.nonzero(A[r])[0]:
                v = _vp(int(A[r, c]), p)
                if best is None or v < best[0]:
                    best = (v, r, int(c))
                    if v == 0:
                        break
            if best and best[0] == 0:
                break
        if best is None:
            break
        v, r, c = best
        alive.remove(r)
        uinv = pow(int(A[r, c]) // p**v, -1, mod)
        for r2 in alive:
            if A[r2, c]:
                f = (int(A[r2, c]) // p**v) * uinv % mod
                A[r2] = (A[r2] - f * A[r]) % mod
        if R[c] and _vp(int(R[c]), p) >= v:
            f = (int(R[c]) // p**v) * uinv % mod
            R = (R - f * A[r]) % mod
    return [int(x) for x in R]


def _eval_dense_np(vec, deg: int, T: np.ndarray, p: int) -> np.ndarray:
    s = np.zeros(len(T), dtype=np.int64)
    for mon, c in zip(_mons(deg), vec):
        c %= p
        if c:
            t = np.full(len(T), c, dtype=np.int64)
            for k, ex in enumerate(mon):
                for _ in range(ex):
                    t = t * T[:, k] % p
            s = (s + t) % p
    return s


def _partial_dense(vec, var: int, deg: int):
    out = [0] * len(_mons(deg - 1))
    idx = _index(deg - 1)
    for e, c in zip(_mons(deg), vec):
        if c and e[var]:
            ee = list(e)
            ee[var] -= 1
            out[idx[tuple(ee)]] += c * e[var]
    return out


@lru_cache(maxsize=8)
def _all_residues(p: int) -> np.ndarray:
    return np.array(list(itertools.product(range(p), repeat=_NFREE)), dtype=np.int64)


def _solutions(eqs, p: int, brute_limit: int) -> np.ndarray:
    """F_p-solutions of the reduced equations."""
    reduced = [[c % p for c in e] for _, e in eqs]
    if p**_NFREE <= brute_limit:
        T = _all_residues(p)
        ok = np.ones(len(T), dtype=bool)
        for e in reduced:
            ok &= _eval_dense_np(e, 2, T, p) == 0
        return T[ok]
    # large p: only affine-linear systems are handled
    lin = _mons(2)
    for e in reduced:
        if any(c and sum(m) == 2 for m, c in zip(lin, e)):
            raise NotImplementedError(f"nonlinear cell system at p = {p}")
    from .arith.linalg_q import solve_affine_p

    idx = _index(2)
    A = [[e[idx[tuple(int(i == j) for i in range(_NFREE))]] for j in range(_NFREE)] for e in reduced]
    b = [(-e[idx[(0,) * _NFREE]]) % p for e in reduced]
    sol = solve_affine_p(A, b, p) if A else ([0] * _NFREE, [[int(i == j) for i in range(_NFREE)] for j in range(_NFREE)])
    if sol is None:
        return np.zeros((0, _NFREE), dtype=np.int64)
    part, ker = sol
    if p ** len(ker) > brute_limit * 10:
        raise NotImplementedError("cell solution space too large")
    out = []
    for co in itertools.product(range(p), repeat=len(ker)):
        out.append([(a + sum(c * v[i] for c, v in zip(co, ker))) % p for i, a in enumerate(part)])
    return np.array(out, dtype=np.int64).reshape(-1, _NFREE)


def _smooth_mask(eqs, sols: np.ndarray, p: int) -> np.ndarray:
    """Rows of sols where the reduced Jacobian has full rank (Hensel witnesses)."""
    from .arith.linalg_q import rank_p

    grads = [[_eval_dense_np(_partial_dense([c % p for c in e], v, 2), 1, sols, p) for v in range(_NFREE)] for _, e in eqs]
    mask = np.zeros(len(sols), dtype=bool)
    for n in range(len(sols)):
        J = [[int(g[v][n]) for v in range(_NFREE)] for g in grads]
        mask[n] = rank_p(J, p) == len(eqs)
    return mask


@dataclass
class CellReport:
    point: ProjPoint
    leaves: Counter = field(default_factory=Counter)  # (valuation, unit mod p) -> cells
    witnessed: Counter = field(default_factory=Counter)  # same keys, cells with a Hensel witness
    unresolved: int = 0
    nodes: int = 0
    max_depth: int = 0

    @property
    def valuations(self) -> set[int]:
        return {v for v, _ in self.leaves}

    @property
    def complete(self) -> bool:
        return self.unresolved == 0

    def to_json(self) -> dict:
        return {
            "point": list(self.point.coords),
            "p": self.point.p,
            "leaves": [[v, u, n] for (v, u), n in sorted(self.leaves.items())],
            "witnessed": [[v, u, n] for (v, u), n in sorted(self.witnessed.items())],
            "unresolved": self.unresolved,
            "nodes": self.nodes,
            "max_depth": self.max_depth,
        }


def analyse_cells(
    model: QuadricModel,
    F: Form,
    P: ProjPoint,
    precision: int = 40,
    max_depth: int = 10,
    brute_limit: int = 400_000,
) -> CellReport:
    """Valuation and leading residue of F on every normalized Z_p-point above P."""
    p = P.p
    base = P.reduce(1)
    lead = base.lead
    mod = p**precision
    report = CellReport(base)
    stack = [(list(base.coords), p, 1)]
    while stack:
        x0, scale, depth = stack.pop()
        report.nodes += 1
        report.max_depth = max(report.max_depth, depth)
        Qn = [_dense(expand_at(q, x0, lead, scale), 2) for q in model.forms]
        eqs = _local_echelon(Qn, p, mod)
        vmax = max((v for v, _ in eqs), default=0)
        work = p ** (precision - vmax)
        gens = [_times_monomial(e, m) for _, e in eqs for m in _mons(2)]
        Fn = _dense(expand_at(F, x0, lead, scale), 4)
        R = _reduce_module(gens, Fn, p, work)
        sols = _solutions(eqs, p, brute_limit)
        if len(sols) == 0:
            continue
        cF = min(_vp(x, p) for x in R)
        if cF >= precision - vmax - 1:
            report.unresolved += len(sols)
            continue
        Rbar = [(x // p**cF) % p for x in R]
        vals = _eval_dense_np(Rbar, 4, sols, p)
        settled = vals != 0
        if settled.any():
            smooth = _smooth_mask(eqs, sols[settled], p)
            for u, s in zip(vals[settled].tolist(), smooth.tolist()):
                report.leaves[(cF, u)] += 1
                if s:
                    report.witnessed[(cF, u)] += 1
        zero = sols[~settled]
        if depth >= max_depth:
            report.unresolved += len(zero)
            continue
        free = [i for i in range(len(x0)) if i != lead]
        for a in zero:
            x1 = list(x0)
            for k, j in enumerate(free):
                x1[j] = x1[j] + scale * int(a[k])
            stack.append((x1, scale * p, depth + 1))
    return report


__all__ = ["CellReport", "analyse_cells", "expand_at"]
