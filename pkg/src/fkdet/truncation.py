"""Matrices of truncated right-convolution operators.

For ``f = Σ a_δ δ`` with real coefficients, the operator ``r(f)`` is right
multiplication by ``f*``.  On the basis vector of ``γ``::

    δ_γ · f* = Σ_δ a_δ γ δ^{-1}

whose coefficient at ``γ'`` is ``a_{γ'^{-1} γ}``.  Compressing to C[F] gives
the |F|×|F| matrix ``M[row γ', col γ] = a_{γ'^{-1} γ}``.  Assembly walks the
support once per column, so it costs O(|F| · |supp f|).

For Z^1 boxes the matrix is a band matrix; it is then kept in the LAPACK
band layout ``ab[u + i - j, j] = M[i, j]`` and never densified unless asked.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.linalg

from .group_core import DEFAULT_SIZE_CAP, FoelnerSet, GroupKind, SizeCapError
from .group_ring import CoeffKind, CoeffKindError, GroupRingElement, SpecMismatchError


class NotSymmetricError(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedMatrix:
    F: FoelnerSet
    entries_coo: tuple  # ((row, col, value), ...), duplicates already summed
    kind: CoeffKind
    symmetric: bool
    bandwidth: int | None = None  # set when banded storage is used

    @property
    def size(self) -> int:
        return len(self.F)

    @property
    def banded(self) -> bool:
        return self.bandwidth is not None

    @cached_property
    def dense(self) -> np.ndarray:
        n = self.size
        if self.kind.exact:
            M = np.zeros((n, n), dtype=object)
            M[:, :] = 0
        else:
            M = np.zeros((n, n))
        for i, j, v in self.entries_coo:
            M[i, j] = v
        return M

    @cached_property
    def band(self) -> np.ndarray:
        """Band layout with ``bandwidth`` sub- and super-diagonals (float)."""
        if self.bandwidth is None:
            raise ValueError("matrix was not assembled in banded storage")
        w = self.bandwidth
        ab = np.zeros((2 * w + 1, self.size))
        for i, j, v in self.entries_coo:
            ab[w + i - j, j] = float(v)
        return ab

    def to_float(self) -> np.ndarray:
        return np.asarray(self.dense, dtype=float)

    def int_rows(self) -> list[dict[int, int]]:
        if self.kind is not CoeffKind.EXACT_INT:
            raise CoeffKindError("integer rows require exact-int coefficients")
        rows: list[dict[int, int]] = [{} for _ in range(self.size)]
        for i, j, v in self.entries_coo:
            rows[i][j] = v
        return rows

    def int_lists(self) -> list[list[int]]:
        n = self.size
        out = [[0] * n for _ in range(n)]
        for i, row in enumerate(self.int_rows()):
            for j, v in row.items():
                out[i][j] = v
        return out

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of a symmetric matrix, ascending."""
        if not self.symmetric:
            raise NotSymmetricError("eigenvalues are only computed for symmetric truncations")
        if self.banded:
            w = self.bandwidth
            return scipy.linalg.eig_banded(self.band[: w + 1], lower=False, eigvals_only=True)
        return np.linalg.eigvalsh(self.to_float())

    def dump(self) -> str:
        """Row-major text dump with header ``|F| coeff_kind``."""
        buf = io.StringIO()
        buf.write(f"{self.size} {self.kind.value}\n")
        M = self.dense
        for i in range(self.size):
            if self.kind.exact:
                buf.write(" ".join(str(x) for x in M[i]) + "\n")
            else:
                buf.write(" ".join(repr(float(x)) for x in M[i]) + "\n")
        return buf.getvalue()


def load_dump(text: str) -> tuple[CoeffKind, list[list]]:
    lines = text.strip().splitlines()
    n_str, kind_str = lines[0].split()
    kind = CoeffKind(kind_str)
    n = int(n_str)
    conv = {CoeffKind.FLOAT: float, CoeffKind.EXACT_INT: int, CoeffKind.EXACT_RATIONAL: Fraction}[kind]
    rows = [[conv(x) for x in ln.split()] for ln in lines[1 : n + 1]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("dump is not square with the declared size")
    return kind, rows


def _contiguous_z1(F: FoelnerSet) -> bool:
    if F.spec.kind is not GroupKind.FREE_ABELIAN or F.spec.rank != 1:
        return False
    first = F.elements[0][0]
    return all(g[0] == first + i for i, g in enumerate(F.elements))


def assemble(f: GroupRingElement, F: FoelnerSet, cap: int = DEFAULT_SIZE_CAP, banded: bool | None = None) -> TruncatedMatrix:
    """Matrix of f_F = p_F ∘ R_{f*} ∘ i_F on the ordered basis of F."""
    if f.spec != F.spec:
        raise SpecMismatchError(f"element over {f.spec!r}, Følner set over {F.spec!r}")
    if len(F) > cap:
        raise SizeCapError(f"|F| = {len(F)} exceeds size cap {cap}")
    spec = f.spec
    mul, inv = spec.mul, spec.inv
    index = F.index_of
    # γ' = γ δ^{-1} for δ in the support
    terms = [(inv(d), a) for d, a in f.items()]
    acc: dict[tuple[int, int], object] = {}
    for col, g in enumerate(F.elements):
        for dinv, a in terms:
            row = index.get(mul(g, dinv))
            if row is not None:
                key = (row, col)
                acc[key] = acc.get(key, 0) + a
    coo = tuple(sorted((i, j, v) for (i, j), v in acc.items() if v != 0))
    symmetric = f.is_self_adjoint()
    width = None
    if banded is not False and _contiguous_z1(F):
        w = max((abs(d[0]) for d in f.support), default=0)
        if banded or 2 * w + 1 < len(F) // 4:
            width = w
    return TruncatedMatrix(F, coo, f.kind, symmetric, width)


@dataclass(frozen=True)
class SpectralCheck:
    passed: bool
    min_eigenvalue: float
    max_eigenvalue: float
    lower: float
    upper: float


def spectral_bounds_check(M: TruncatedMatrix, a: float, b: float, rtol: float = 1e-12) -> SpectralCheck:
    """Do all eigenvalues of the symmetric matrix M lie in [a, b]?

    The extreme eigenvalues are the min/max Rayleigh quotients.  A relative
    slack ``rtol * max(|a|, |b|, 1) * sqrt(size)`` absorbs eigensolver rounding.
    """
    if not M.symmetric:
        raise NotSymmetricError("spectral bounds need a symmetric truncation")
    ev = M.eigenvalues()
    lo, hi = float(ev[0]), float(ev[-1])
    slack = rtol * max(abs(a), abs(b), 1.0) * max(1, M.size) ** 0.5
    ok = lo >= a - slack and hi <= b + slack
    return SpectralCheck(ok, lo, hi, a, b)
