"""Exact linear algebra over Q and over F_p (dense, row based)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def rref_q(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    A = [[Fraction(x) for x in r] for r in rows]
    if not A:
        return [], []
    m, n = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A[:r], pivots


def rank_q(rows: Sequence[Sequence]) -> int:
    return len(rref_q(rows)[1])


def solve_q(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """One solution of A x = b over Q (free variables set to 0), or None."""
    n = len(A[0])
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    R, piv = rref_q(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, c in zip(R, piv):
        x[c] = row[n]
    return x


def nullspace_q(rows: Sequence[Sequence], n: int | None = None) -> list[list[Fraction]]:
    if n is None:
        n = len(rows[0])
    R, piv = rref_q(rows) if rows else ([], [])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, c in zip(R, piv):
            v[c] = -row[f]
        basis.append(v)
    return basis


def reduce_by_rref(v: Sequence, R: Sequence[Sequence], piv: Sequence[int]) -> list:
    """Normal form of v modulo the row space of an RREF (pivot entries cleared)."""
    v = list(v)
    for row, c in zip(R, piv):
        f = v[c]
        if f:
            v = [a - f * b for a, b in zip(v, row)]
    return v


def det_q(M: Sequence[Sequence]) -> Fraction:
    A = [[Fraction(x) for x in r] for r in M]
    n = len(A)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = -d
        d *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return d


def inverse_q(M: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(M)
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M)]
    R, piv = rref_q(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def matmul_q(A, B):
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(r, c)) for c in cols] for r in A]


# --- prime fields ---------------------------------------------------------


def rref_p(rows: Sequence[Sequence[int]], p: int) -> tuple[list[list[int]], list[int]]:
    A = [[x % p for x in r] for r in rows]
    if not A:
        return [], []
    m, n = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A[:r], pivots


def rank_p(rows: Sequence[Sequence[int]], p: int) -> int:
    return len(rref_p(rows, p)[1])


def solve_affine_p(A: Sequence[Sequence[int]], b: Sequence[int], p: int):
    """Solutions of A x = b over F_p as (particular, kernel basis), or None."""
    n = len(A[0])
    R, piv = rref_p([list(r) + [bi] for r, bi in zip(A, b)], p)
    if n in piv:
        return None
    part = [0] * n
    for row, c in zip(R, piv):
        part[c] = row[n]
    ker = []
    for f in (c for c in range(n) if c not in piv):
        v = [0] * n
        v[f] = 1
        for row, c in zip(R, piv):
            v[c] = (-row[f]) % p
        ker.append(v)
    return part, ker


def det_p(M: Sequence[Sequence[int]], p: int) -> int:
    A = [[x % p for x in r] for r in M]
    n = len(A)
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = -d
        d = d * A[c][c] % p
        inv = pow(A[c][c], -1, p)
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] * inv % p
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[c])]
    return d % p
