"""Exact integer linear algebra: Smith normal form and determinants.

Both routines use Python integers throughout, so there is no overflow.
They are written for the sparse, banded matrices produced by truncating
group-ring elements: row and column operations skip zero multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math
from math import gcd
from typing import Sequence


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x a + y b = g."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class SmithForm:
    divisors: tuple[int, ...]
    U: list[list[int]] | None = None
    V: list[list[int]] | None = None

    @property
    def rank(self) -> int:
        return sum(1 for d in self.divisors if d != 0)


class _Reducer:
    """Diagonalizes A in place by unimodular row/column operations.

    Row operations are mirrored on U and column operations on V, so that
    U @ A_original @ V equals the current A at every step.
    """

    def __init__(self, A: list[list[int]], track: bool):
        self.A = A
        self.m = len(A)
        self.n = len(A[0]) if A else 0
        self.U = _identity(self.m) if track else None
        self.V = _identity(self.n) if track else None

    # rows i, j <- (x r_i + y r_j, u r_i + v r_j), determinant x v - y u = ±1
    def _rows(self, mats, i, j, x, y, u, v, start=0):
        for M in mats:
            ri, rj = M[i], M[j]
            for c in range(start, len(ri)):
                a, b = ri[c], rj[c]
                if a or b:
                    ri[c] = x * a + y * b
                    rj[c] = u * a + v * b

    def _cols(self, mats, i, j, x, y, u, v, start=0):
        for M in mats:
            for r in range(start, len(M)):
                row = M[r]
                a, b = row[i], row[j]
                if a or b:
                    row[i] = x * a + y * b
                    row[j] = u * a + v * b

    def row_op(self, i, j, x, y, u, v, start):
        self._rows([self.A], i, j, x, y, u, v, start)
        if self.U is not None:
            self._rows([self.U], i, j, x, y, u, v)

    def col_op(self, i, j, x, y, u, v, start):
        self._cols([self.A], i, j, x, y, u, v, start)
        if self.V is not None:
            self._cols([self.V], i, j, x, y, u, v)

    def swap_rows(self, i, j):
        self.A[i], self.A[j] = self.A[j], self.A[i]
        if self.U is not None:
            self.U[i], self.U[j] = self.U[j], self.U[i]

    def swap_cols(self, i, j):
        for M in [self.A] + ([self.V] if self.V is not None else []):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def find_pivot(self, k):
        A = self.A
        if A[k][k]:
            return k, k
        for c in range(k, self.n):
            for r in range(k, self.m):
                if A[r][c]:
                    return r, c
        return None

    def diagonalize(self) -> list[int]:
        A = self.A
        r = min(self.m, self.n)
        for k in range(r):
            pos = self.find_pivot(k)
            if pos is None:
                break
            pr, pc = pos
            if pr != k:
                self.swap_rows(k, pr)
            if pc != k:
                self.swap_cols(k, pc)
            while True:
                # clear column k below the pivot
                for i in range(k + 1, self.m):
                    b = A[i][k]
                    if not b:
                        continue
                    a = A[k][k]
                    if b % a == 0:
                        self.row_op(k, i, 1, 0, -(b // a), 1, k)
                    else:
                        g, x, y = _egcd(a, b)
                        self.row_op(k, i, x, y, -(b // g), a // g, k)
                # clear row k right of the pivot
                dirty = False
                for j in range(k + 1, self.n):
                    b = A[k][j]
                    if not b:
                        continue
                    a = A[k][k]
                    if b % a == 0:
                        self.col_op(k, j, 1, 0, -(b // a), 1, k)
                    else:
                        g, x, y = _egcd(a, b)
                        self.col_op(k, j, x, y, -(b // g), a // g, k)
                        dirty = True
                if not dirty:
                    break
                if all(A[i][k] == 0 for i in range(k + 1, self.m)):
                    break
        return [A[i][i] for i in range(r)]

    def normalize(self, diag: list[int]) -> list[int]:
        """Turn a diagonal into the divisibility chain d_1 | d_2 | ... with d_i >= 0."""
        r = len(diag)
        for i in range(r):
            if diag[i] < 0:
                diag[i] = -diag[i]
                if self.U is not None:
                    self.U[i] = [-x for x in self.U[i]]
        for i in range(r):
            for j in range(i + 1, r):
                a, b = diag[i], diag[j]
                if b == 0 or (a != 0 and b % a == 0):
                    continue
                g, x, y = _egcd(a, b)
                # diag(a, b) -> diag(g, ab/g) via U2 = [[x, y], [-b/g, a/g]],
                # V2 = [[1, -y b/g], [1, x a/g]]
                if self.U is not None:
                    self._rows([self.U], i, j, x, y, -(b // g), a // g)
                    self._cols([self.V], i, j, 1, 1, -y * (b // g), x * (a // g))
                diag[i], diag[j] = g, a // g * b
        return diag


def _diagonalize_mod(A: list[list[int]], R: int) -> list[int]:
    """Diagonal of the Smith form of a square A with |det A| = R != 0.

    The column lattice of A contains R Z^n, so all entries may be reduced
    mod R.  After clearing row and column k the pivot splits off as
    gcd(a_kk, R) and the remaining block has index R / d_k.
    """
    n = len(A)
    diag = []
    for k in range(n):
        for row in A[k:]:
            for c in range(k, n):
                row[c] %= R
        while True:
            # bring the smallest nonzero entry of column k, then row k, to the pivot
            col = [i for i in range(k, n) if A[i][k]]
            if col:
                p = min(col, key=lambda i: A[i][k])
                A[k], A[p] = A[p], A[k]
            else:
                rowk = [j for j in range(k, n) if A[k][j]]
                if not rowk:
                    break
                p = min(rowk, key=lambda j: A[k][j])
                for row in A[k:]:
                    row[k], row[p] = row[p], row[k]
            a = A[k][k]
            pr = A[k]
            for i in range(k + 1, n):
                ri = A[i]
                b = ri[k]
                if not b:
                    continue
                if b % a == 0:
                    t = b // a
                    for c in range(k, n):
                        if pr[c]:
                            ri[c] = (ri[c] - t * pr[c]) % R
                else:
                    g, x, y = _egcd(a, b)
                    u, v = -(b // g), a // g
                    for c in range(k, n):
                        s, w = pr[c], ri[c]
                        if s or w:
                            pr[c], ri[c] = (x * s + y * w) % R, (u * s + v * w) % R
                    a = pr[k]
            dirty = False
            for j in range(k + 1, n):
                b = pr[j]
                if not b:
                    continue
                a = pr[k]
                if b % a == 0:
                    t = b // a
                    for row in A[k:]:
                        if row[k]:
                            row[j] = (row[j] - t * row[k]) % R
                else:
                    g, x, y = _egcd(a, b)
                    u, v = -(b // g), a // g
                    for row in A[k:]:
                        s, w = row[k], row[j]
                        if s or w:
                            row[k], row[j] = (x * s + y * w) % R, (u * s + v * w) % R
                    dirty = True
            if not dirty or not any(A[i][k] for i in range(k + 1, n)):
                if not any(pr[j] for j in range(k + 1, n)):
                    break
        d = math.gcd(A[k][k], R)
        diag.append(d)
        R //= d
    return diag


def _chain(diag: list[int]) -> list[int]:
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            a, b = diag[i], diag[j]
            if b == 0 or (a != 0 and b % a == 0):
                continue
            g = math.gcd(a, b)
            diag[i], diag[j] = g, a // g * b
    return diag


def snf(M: Sequence[Sequence[int]], transforms: bool = False, modulus: int | None = None) -> SmithForm:
    """Elementary divisors d_1 | d_2 | ... | d_r (r = min(rows, cols)), zeros last.

    With ``transforms=True`` also returns unimodular U, V such that
    U M V = diag(d) (rectangular).  For a square matrix whose |det| is
    already known, ``modulus=|det|`` runs the elimination modulo it,
    which keeps entries bounded.
    """
    A = [[int(x) for x in row] for row in M]
    if not A or not A[0]:
        return SmithForm((), _identity(len(A)) if transforms else None, _identity(0) if transforms else None)
    if modulus is not None:
        if transforms or len(A) != len(A[0]) or modulus == 0:
            raise ValueError("modular Smith form needs a square nonsingular matrix and no transforms")
        diag = _chain(_diagonalize_mod(A, abs(int(modulus))))
        return SmithForm(tuple(diag))
    red = _Reducer(A, transforms)
    diag = red.normalize(red.diagonalize())
    return SmithForm(tuple(diag), red.U, red.V)


def elementary_divisors(M: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return snf(M).divisors


def sparse_rows(M: Sequence[Sequence[int]]) -> list[dict[int, int]]:
    return [{j: v for j, v in enumerate(row) if v} for row in M]


def exact_det(rows: list[dict[int, int]] | Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by rational Gaussian elimination on sparse rows.

    Independent of :func:`snf`; pivots are taken column by column from the
    row with the fewest nonzeros.
    """
    if rows and not isinstance(rows[0], dict):
        rows = sparse_rows(rows)
    n = len(rows)
    active = {i: {j: Fraction(v) for j, v in r.items() if v} for i, r in enumerate(rows)}
    col_rows: dict[int, set[int]] = {}
    for i, r in active.items():
        for j in r:
            col_rows.setdefault(j, set()).add(i)
    det = Fraction(1)
    sign = 1
    order = []
    for k in range(n):
        cands = col_rows.get(k, set())
        if not cands:
            return 0
        p = min(cands, key=lambda i: (len(active[i]), i))
        prow = active.pop(p)
        for j in prow:
            col_rows[j].discard(p)
        order.append(p)
        pivot = prow[k]
        det *= pivot
        for i in list(col_rows[k]):
            row = active[i]
            factor = row[k] / pivot
            for j, v in prow.items():
                nv = row.get(j, 0) - factor * v
                if nv:
                    if j not in row:
                        col_rows.setdefault(j, set()).add(i)
                    row[j] = nv
                else:
                    if j in row:
                        del row[j]
                        col_rows[j].discard(i)
    # sign of the row permutation chosen as pivots
    perm = order
    seen = [False] * n
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    assert det.denominator == 1
    return sign * int(det)


def bareiss_det(M: Sequence[Sequence[int]]) -> int:
    """Dense fraction-free determinant, for small test matrices."""
    A = [[int(x) for x in row] for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (akk * row_i[j] - aik * row_k[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def integer_rank(M: Sequence[Sequence[int]]) -> int:
    """Rank over Q (equal to the number of nonzero elementary divisors)."""
    rows = [[Fraction(x) for x in row] for row in M]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[rank], rows[p] = rows[p], rows[rank]
        pr = rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][c]:
                t = rows[i][c] / pr[c]
                rows[i] = [a - t * b for a, b in zip(rows[i], pr)]
        rank += 1
    return rank


__all__ = ["SmithForm", "snf", "elementary_divisors", "exact_det", "bareiss_det", "integer_rank", "gcd"]
