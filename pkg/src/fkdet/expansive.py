"""Certificates of L^1-invertibility (hence expansiveness of Γ on X_f).

A certificate is positive evidence only: failing every route does not
prove the action is non-expansive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .group_core import GroupKind
from .group_ring import CoeffKind, GroupRingElement, l1_norm, trace_e
from .mahler import certify_nonvanishing
from .snf import exact_det
from .finite_entropy import right_multiplication_matrix


class Route(enum.Enum):
    CONTRACTION_SERIES = "contraction_series"
    TORUS_NONVANISHING = "torus_nonvanishing"
    FINITE_UNIT = "finite_unit"


class ContractionUnavailableError(ValueError):
    pass


@dataclass(frozen=True)
class ExpansivenessCertificate:
    is_certified: bool
    route: Route | None
    epsilon: Fraction | float | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "is_certified": self.is_certified,
            "route": self.route.value if self.route else None,
            "epsilon": None if self.epsilon is None else float(self.epsilon),
            "epsilon_exact": str(self.epsilon) if isinstance(self.epsilon, Fraction) else None,
            "details": self.details,
        }


def expansiveness_constant(f: GroupRingElement):
    """ε = 1 / (3 ||f||_1), exact for exact coefficients."""
    norm = l1_norm(f)
    if f.kind.exact:
        return Fraction(1) / (3 * Fraction(norm))
    return 1.0 / (3.0 * norm)


def contraction_split(f: GroupRingElement):
    """(c, g, ||g||_1) with f = c(1 + g), c the identity coefficient, or None."""
    c = trace_e(f)
    if c == 0:
        return None
    rest = f - c
    if f.kind.exact:
        q = Fraction(l1_norm(rest)) / abs(Fraction(c))
        g = rest.to_rational().scale(Fraction(1) / Fraction(c))
    else:
        q = l1_norm(rest) / abs(c)
        g = rest.scale(1.0 / c)
    return c, g, q


def certify_expansive(f: GroupRingElement, routes=tuple(Route)) -> ExpansivenessCertificate:
    """Try the contraction, torus and finite-group routes in that order.

    ``routes`` restricts which routes are attempted (order is fixed).
    """
    if not f:
        raise ValueError("f must be nonzero")
    norms = {"l1_norm": float(l1_norm(f))}
    split = contraction_split(f) if Route.CONTRACTION_SERIES in routes else None
    if split is not None:
        c, _, q = split
        norms.update(c=float(c), g_l1=float(q))
        if q < 1:
            return ExpansivenessCertificate(True, Route.CONTRACTION_SERIES, expansiveness_constant(f), norms)
    kind = f.spec.kind
    if kind is GroupKind.FREE_ABELIAN and Route.TORUS_NONVANISHING in routes:
        cert = certify_nonvanishing(f)
        if cert is not None:
            norms.update(torus_m=cert.m, grid_min=cert.grid_min, lipschitz_bound=cert.lipschitz_bound)
            if cert.certified:
                return ExpansivenessCertificate(True, Route.TORUS_NONVANISHING, expansiveness_constant(f), norms)
    elif kind is GroupKind.FINITE and f.kind is CoeffKind.EXACT_INT and Route.FINITE_UNIT in routes:
        det = exact_det(right_multiplication_matrix(f))
        norms["det"] = det
        if det != 0:
            return ExpansivenessCertificate(True, Route.FINITE_UNIT, expansiveness_constant(f), norms)
    return ExpansivenessCertificate(False, None, None, norms)


@dataclass(frozen=True)
class NeumannInverse:
    inverse: GroupRingElement
    error_bound: float  # ||f^{-1} - inverse||_1
    residual: float  # ||f * inverse - e||_1, measured
    terms: int


def neumann_inverse(f: GroupRingElement, tol: float = 1e-8, max_terms: int = 10_000) -> NeumannInverse:
    """f^{-1} ≈ c^{-1} Σ_{ν<=M} (-g)^ν for f = c(1 + g), ||g||_1 < 1.

    M is the least integer with |c|^{-1} q^{M+1} / (1 - q) <= tol; the
    residual f·approx - e = -(-g)^{M+1} is then at most tol·||f||_1.
    """
    split = contraction_split(f)
    if split is None or not split[2] < 1:
        raise ContractionUnavailableError("f = c(1+g) with ||g||_1 < 1 is not available")
    c, g, q = split
    c, q = float(c), float(q)
    g = g.to_float()
    terms = 0
    while abs(1.0 / c) * q ** (terms + 1) / (1.0 - q) > tol:
        terms += 1
        if terms > max_terms:
            raise ContractionUnavailableError(f"more than {max_terms} terms needed")
    one = GroupRingElement.one(f.spec, CoeffKind.FLOAT)
    total = one
    power = one
    neg_g = -g
    for _ in range(terms):
        power = power * neg_g
        total = total + power
    approx = total.scale(1.0 / c)
    residual = l1_norm(f.to_float() * approx - one)
    bound = abs(1.0 / c) * q ** (terms + 1) / (1.0 - q)
    fnorm = float(l1_norm(f))
    if residual > tol * fnorm * (1 + 1e-9) + 1e-15 * fnorm:
        raise ArithmeticError(f"residual {residual} exceeds tol * ||f||_1 = {tol * fnorm}")
    return NeumannInverse(approx, bound, residual, terms)


__all__ = [
    "Route",
    "ExpansivenessCertificate",
    "certify_expansive",
    "expansiveness_constant",
    "neumann_inverse",
    "NeumannInverse",
    "ContractionUnavailableError",
]
