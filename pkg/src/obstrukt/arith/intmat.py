"""Integer matrices: Smith normal form, echelon reduction, kernels, solving."""

from __future__ import annotations

from typing import Sequence


class IntMatrix:
    """Dense matrix of Python integers (rows stored as lists)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[int]], ncols: int | None = None):
        self.rows = [[int(x) for x in r] for r in rows]
        self.nrows = len(self.rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        self.ncols = ncols
        if any(len(r) != ncols for r in self.rows):
            raise ValueError("ragged matrix")

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, m: int, n: int) -> "IntMatrix":
        return cls([[0] * n for _ in range(m)], n)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.rows == other.rows and self.ncols == other.ncols

    def __repr__(self):
        return f"IntMatrix({self.nrows}x{self.ncols})"

    def tolist(self) -> list[list[int]]:
        return [r[:] for r in self.rows]

    def transpose(self) -> "IntMatrix":
        return IntMatrix([list(c) for c in zip(*self.rows)] if self.rows else [], self.nrows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.rows)) if other.rows else [()] * other.ncols
        return IntMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows], other.ncols)

    def apply(self, v: Sequence[int]) -> list[int]:
        return [sum(a * b for a, b in zip(r, v)) for r in self.rows]

    def det(self) -> int:
        """Determinant by fraction-free Bareiss elimination."""
        n = self.nrows
        if n != self.ncols:
            raise ValueError("square matrix required")
        a = self.tolist()
        sign, prev = 1, 1
        for k in range(n - 1):
            piv = next((i for i in range(k, n) if a[i][k]), None)
            if piv is None:
                return 0
            if piv != k:
                a[k], a[piv] = a[piv], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1] if n else 1

    def rank(self) -> int:
        return len(echelon_rows(self.rows))


def echelon_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Integer row echelon form spanning the same row lattice (zero rows dropped)."""
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    ncols = len(work[0])
    out = []
    for c in range(ncols):
        active = [r for r in work if r[c]]
        rest = [r for r in work if not r[c]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[c]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[c] // piv[c]
                r2 = [a - q * b for a, b in zip(r, piv)]
                if r2[c]:
                    nxt.append(r2)
                elif any(r2):
                    rest.append(r2)
            active = nxt
        if active:
            piv = active[0]
            if piv[c] < 0:
                piv = [-a for a in piv]
            out.append(piv)
        work = rest
    return out


def smith_normal_form(M: IntMatrix, track: bool = True):
    """Return (U, S, V) with U*M*V = S diagonal, d_i | d_{i+1}, U and V unimodular.

    With ``track=False`` U is returned as None (V is always tracked).
    """
    m, n = M.nrows, M.ncols
    A = M.tolist()
    U = IntMatrix.identity(m).rows if track else None
    V = IntMatrix.identity(n).rows

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if track:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        if q:
            A[dst] = [a - q * b for a, b in zip(A[dst], A[src])]
            if track:
                U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        if q:
            for r in A:
                r[dst] -= q * r[src]
            for r in V:
                r[dst] -= q * r[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, A[i][t] // A[t][t])
                    if A[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, A[t][j] // A[t][t])
                    if A[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            piv = A[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, -1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            if track:
                U[t] = [-a for a in U[t]]
        t += 1
    return (IntMatrix(U, m) if track else None), IntMatrix(A, n), IntMatrix(V, n)


def _pari_matrix(M: IntMatrix):
    from cypari import pari

    if M.nrows == 0 or M.ncols == 0:
        return pari.matrix(M.nrows, M.ncols)
    return pari.matrix(M.nrows, M.ncols, [x for r in M.rows for x in r])


def elementary_divisors(M: IntMatrix) -> list[int]:
    """Nonzero elementary divisors, smallest first."""
    from cypari import pari

    if not any(any(r) for r in M.rows):
        return []
    d = pari.matsnf(_pari_matrix(M))
    return sorted(abs(int(x)) for x in d if int(x))


def integer_kernel(M: IntMatrix) -> list[list[int]]:
    """LLL-reduced basis of {x in Z^n : M x = 0}; it spans a saturated sublattice."""
    from cypari import pari

    n = M.ncols
    if not any(any(r) for r in M.rows):
        return [[int(i == j) for i in range(n)] for j in range(n)]
    K = pari.matkerint(_pari_matrix(M))
    return [[int(x) for x in col] for col in K]


def solve_integer(A: IntMatrix, b: Sequence[int]) -> list[int] | None:
    """Some x in Z^n with A x = b, or None if no integral solution exists."""
    from cypari import pari

    if A.nrows == 0:
        return [0] * A.ncols
    x = pari.matsolvemod(_pari_matrix(A), 0, pari.vector(len(b), [int(v) for v in b]).Col())
    if x.type() == "t_INT":
        return None
    return [int(v) for v in x]
