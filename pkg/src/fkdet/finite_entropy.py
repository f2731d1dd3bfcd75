"""Exact entropy and determinant of principal actions of finite groups.

For finite Γ the dual X_f of ZΓ / ZΓf is finite exactly when right
multiplication R_f is invertible, and then h_f = log|X_f| / |Γ|.  Otherwise
X_f contains a torus of positive dimension and h_f = ∞, while the
determinant only sees the nonzero spectrum of R_{ff*}.

R_f maps the basis vector γ to γf, so its matrix is the truncation of f*
on F = Γ (see :mod:`fkdet.truncation`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .group_core import FoelnerSet, GroupKind, GroupSpec
from .group_ring import CoeffKind, CoeffKindError, GroupRingElement, make_positive, star
from .snf import exact_det, integer_rank, snf
from .truncation import assemble

INFINITE = math.inf


class UndefinedDeterminantError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteEntropyResult:
    index: int | float  # INFINITE when R_f is singular
    h_f: float
    logdet_eigen: float
    is_unit: bool
    divisors: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "index": "inf" if self.index == INFINITE else self.index,
            "h_f": "inf" if self.h_f == INFINITE else self.h_f,
            "logdet_eigen": self.logdet_eigen,
            "is_unit": self.is_unit,
            "divisors": list(self.divisors),
        }


def whole_group(spec: GroupSpec) -> FoelnerSet:
    if spec.kind is not GroupKind.FINITE:
        raise ValueError(f"{spec!r} is not a finite group")
    return FoelnerSet(spec, tuple(range(spec.order)), label=spec.order)


def right_multiplication_matrix(f: GroupRingElement) -> list[list[int]]:
    """Integer matrix of R_f : ZΓ -> ZΓ, x -> x f, on the basis Γ."""
    if f.kind is not CoeffKind.EXACT_INT:
        raise CoeffKindError("needs integer coefficients")
    return assemble(star(f), whole_group(f.spec)).int_lists()


def finite_logdet_eigen(f: GroupRingElement) -> float:
    """(1 / 2|Γ|) Σ log λ over the nonzero eigenvalues λ of R_{ff*}.

    The number of nonzero eigenvalues is the exact rank of R_{ff*}, taken from
    its exact rational elimination when f is integral; the float cutoff
    σ_max · |Γ| · eps · 16 is used otherwise.
    """
    if not f:
        raise UndefinedDeterminantError("det of 0 is undefined")
    spec = f.spec
    order = spec.order
    if order is None:
        raise ValueError(f"{spec!r} is not a finite group")
    p = make_positive(f)
    M = assemble(p, whole_group(spec))
    ev = np.linalg.eigvalsh(M.to_float())
    cutoff = float(ev[-1]) * order * np.finfo(float).eps * 16
    if p.kind is CoeffKind.EXACT_INT:
        rank = integer_rank(M.int_lists())
    else:
        rank = int(np.sum(ev > cutoff))
    nonzero = np.sort(ev)[order - rank :]
    if rank and nonzero[0] <= 0:
        raise ArithmeticError("eigenvalue solver disagrees with the exact rank")
    return math.fsum(np.log(nonzero).tolist()) / (2 * order)


def finite_entropy(f: GroupRingElement) -> FiniteEntropyResult:
    """Index |ZΓ / ZΓf| from the Smith form of R_f, h_f, and the eigenvalue determinant."""
    if f.spec.kind is not GroupKind.FINITE:
        raise ValueError(f"{f.spec!r} is not a finite group")
    R = right_multiplication_matrix(f)
    order = f.spec.order
    logdet = finite_logdet_eigen(f) if f else -INFINITE
    det = exact_det(R)
    if det == 0:
        divisors = snf(R).divisors
        if 0 not in divisors:
            raise RuntimeError("Smith form is nonsingular but det = 0")
        return FiniteEntropyResult(INFINITE, INFINITE, logdet, False, divisors)
    divisors = snf(R, modulus=det).divisors
    index = math.prod(divisors)
    if abs(det) != index:
        raise RuntimeError(f"Smith form product {index} != |det| {abs(det)}")
    return FiniteEntropyResult(index, math.log(index) / order, logdet, True, divisors)
