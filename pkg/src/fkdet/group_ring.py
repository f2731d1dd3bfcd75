"""Finitely supported elements of the group ring ZΓ ⊂ QΓ ⊂ RΓ.

An element ``f = Σ a_γ γ`` is stored as a mapping ``γ -> a_γ`` with zero
coefficients dropped.  Coefficients are Python ``int`` (exact integer),
``Fraction`` (exact rational) or ``float``.  Complex coefficients are not
supported, so the involution ``f* = Σ conj(a_γ) γ^{-1}`` only inverts the
support.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple

from .group_core import GroupSpec


class CoeffKind(enum.Enum):
    EXACT_INT = "exact_int"
    EXACT_RATIONAL = "exact_rational"
    FLOAT = "float"

    @property
    def exact(self) -> bool:
        return self is not CoeffKind.FLOAT


class SpecMismatchError(ValueError):
    pass


class CoeffKindError(TypeError):
    """Exact and float coefficients were mixed, or a float reached an exact-only path."""


class NotAContractionError(ValueError):
    pass


def _normalize(value, kind: CoeffKind):
    if kind is CoeffKind.FLOAT:
        return float(value)
    if kind is CoeffKind.EXACT_RATIONAL:
        return Fraction(value)
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise CoeffKindError(f"non-integral coefficient {value} in an exact-int element")
        return int(value)
    return int(value)


def _infer_kind(values: Iterable) -> CoeffKind:
    kind = CoeffKind.EXACT_INT
    for v in values:
        if isinstance(v, bool):
            raise CoeffKindError("bool is not a coefficient")
        if isinstance(v, int):
            continue
        if isinstance(v, (Fraction, Rational)):
            if kind is CoeffKind.EXACT_INT:
                kind = CoeffKind.EXACT_RATIONAL
            continue
        if isinstance(v, float):
            kind = CoeffKind.FLOAT
            continue
        raise CoeffKindError(f"unsupported coefficient type {type(v).__name__}")
    return kind


def _combine_kinds(a: CoeffKind, b: CoeffKind) -> CoeffKind:
    if a.exact != b.exact:
        raise CoeffKindError(f"cannot combine {a.value} and {b.value} coefficients")
    if a is CoeffKind.FLOAT:
        return a
    if CoeffKind.EXACT_RATIONAL in (a, b):
        return CoeffKind.EXACT_RATIONAL
    return CoeffKind.EXACT_INT


class GroupRingElement:
    """``Σ a_γ γ`` with finite support; immutable."""

    __slots__ = ("spec", "_coeffs", "kind", "_hash")

    def __init__(self, spec: GroupSpec, coeffs: Mapping | Iterable = (), kind: CoeffKind | None = None, *, _trusted=False):
        self.spec = spec
        if _trusted:
            items = coeffs
        else:
            raw = dict(coeffs)
            for g in raw:
                spec.check(g)
            if kind is None:
                kind = _infer_kind(raw.values())
            items = {g: _normalize(a, kind) for g, a in raw.items() if a != 0}
        self._coeffs = items
        self.kind = kind
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, spec: GroupSpec, kind: CoeffKind = CoeffKind.EXACT_INT):
        return cls(spec, {}, kind, _trusted=True)

    @classmethod
    def one(cls, spec: GroupSpec, kind: CoeffKind = CoeffKind.EXACT_INT):
        return cls.monomial(spec, spec.identity(), 1, kind)

    @classmethod
    def monomial(cls, spec: GroupSpec, g, coeff=1, kind: CoeffKind | None = None):
        return cls(spec, {g: coeff}, kind)

    # -- read access ------------------------------------------------------
    @property
    def coeffs(self) -> Mapping:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    @property
    def support(self) -> frozenset:
        return frozenset(self._coeffs)

    def __getitem__(self, g):
        return self._coeffs.get(g, 0.0 if self.kind is CoeffKind.FLOAT else 0)

    def __len__(self):
        return len(self._coeffs)

    def __bool__(self):
        return bool(self._coeffs)

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.spec == other.spec and self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.spec, frozenset(self._coeffs.items())))
        return self._hash

    def __repr__(self):
        if not self._coeffs:
            return "0"
        terms = [f"{a}*{self.spec.format_element(g)}" for g, a in sorted(self._coeffs.items())]
        return " + ".join(terms)

    # -- kind conversion --------------------------------------------------
    def to_float(self) -> "GroupRingElement":
        return GroupRingElement(self.spec, {g: float(a) for g, a in self._coeffs.items()}, CoeffKind.FLOAT, _trusted=True)

    def to_rational(self) -> "GroupRingElement":
        if not self.kind.exact:
            raise CoeffKindError("float element cannot be made exact")
        return GroupRingElement(self.spec, {g: Fraction(a) for g, a in self._coeffs.items()}, CoeffKind.EXACT_RATIONAL, _trusted=True)

    def to_int(self) -> "GroupRingElement":
        if not self.kind.exact:
            raise CoeffKindError("float element cannot be made exact")
        return GroupRingElement(self.spec, self._coeffs, CoeffKind.EXACT_INT)

    # -- arithmetic -------------------------------------------------------
    def _check_compatible(self, other: "GroupRingElement") -> CoeffKind:
        if self.spec != other.spec:
            raise SpecMismatchError(f"{self.spec!r} vs {other.spec!r}")
        return _combine_kinds(self.kind, other.kind)

    def _coerce(self, other):
        if isinstance(other, GroupRingElement):
            return other
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            if other == 0:
                return GroupRingElement.zero(self.spec, self.kind)
            if self.kind is CoeffKind.FLOAT:
                other = float(other)
            return GroupRingElement(self.spec, {self.spec.identity(): other})
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        kind = self._check_compatible(other)
        out = dict(self._coeffs)
        for g, b in other._coeffs.items():
            v = out.get(g, 0) + b
            if v == 0:
                out.pop(g, None)
            else:
                out[g] = v
        return GroupRingElement(self.spec, {g: _normalize(a, kind) for g, a in out.items()}, kind, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement(self.spec, {g: -a for g, a in self._coeffs.items()}, self.kind, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "GroupRingElement":
        """Multiply every coefficient by a scalar."""
        if self.kind is CoeffKind.FLOAT:
            c, kind = float(c), CoeffKind.FLOAT
        else:
            kind = _combine_kinds(self.kind, _infer_kind([c]))
        return GroupRingElement(self.spec, {g: a * c for g, a in self._coeffs.items()}, kind)

    def __mul__(self, other):
        if isinstance(other, GroupRingElement):
            return convolve(self, other)
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, c):
        if isinstance(c, (int, Fraction)) and self.kind.exact:
            return self.scale(Fraction(1, 1) / c)
        return self.scale(1.0 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined in the group ring")
        result = GroupRingElement.one(self.spec, self.kind)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def star(self) -> "GroupRingElement":
        return star(self)

    def l1_norm(self):
        return l1_norm(self)

    def trace_e(self):
        return trace_e(self)

    def is_self_adjoint(self) -> bool:
        return star(self) == self


def convolve(f: GroupRingElement, g: GroupRingElement) -> GroupRingElement:
    """(Σ a_γ γ)(Σ b_δ δ) = Σ a_γ b_δ (γδ)."""
    kind = f._check_compatible(g)
    mul = f.spec.mul
    out: dict = {}
    get = out.get
    for x, a in f._coeffs.items():
        for y, b in g._coeffs.items():
            z = mul(x, y)
            out[z] = get(z, 0) + a * b
    out = {z: _normalize(c, kind) for z, c in out.items() if c != 0}
    return GroupRingElement(f.spec, out, kind, _trusted=True)


def star(f: GroupRingElement) -> GroupRingElement:
    """f* = Σ a_γ γ^{-1} (real coefficients)."""
    inv = f.spec.inv
    return GroupRingElement(f.spec, {inv(g): a for g, a in f._coeffs.items()}, f.kind, _trusted=True)


def l1_norm(f: GroupRingElement):
    """Σ |a_γ|; exact for exact kinds."""
    if f.kind is CoeffKind.FLOAT:
        return math.fsum(abs(a) for a in f._coeffs.values())
    return sum((abs(a) for a in f._coeffs.values()), 0)


def l2_norm_sq(f: GroupRingElement):
    if f.kind is CoeffKind.FLOAT:
        return math.fsum(a * a for a in f._coeffs.values())
    return sum((a * a for a in f._coeffs.values()), 0)


def trace_e(f: GroupRingElement):
    """The von Neumann trace on CΓ: the coefficient of the identity."""
    return f[f.spec.identity()]


def trace_of_product(f: GroupRingElement, g: GroupRingElement):
    """trace_e(f g) = Σ_γ a_γ b_{γ^{-1}}, without forming the product."""
    f._check_compatible(g)
    inv = f.spec.inv
    small, big = (f, g) if len(f) <= len(g) else (g, f)
    bc = big._coeffs
    vals = [a * bc[inv(x)] for x, a in small._coeffs.items() if inv(x) in bc]
    if f.kind is CoeffKind.FLOAT:
        return math.fsum(vals)
    return sum(vals, 0)


class L1Unit(NamedTuple):
    element: GroupRingElement
    is_l1_unit: bool
    is_integral: bool


def build_l1_unit(g: GroupRingElement, N: int) -> L1Unit:
    """h = N(1 + g); a unit of L^1(Γ) whenever ||g||_1 < 1."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    if not l1_norm(g) < 1:
        raise NotAContractionError(f"||g||_1 = {l1_norm(g)} is not < 1")
    h = (GroupRingElement.one(g.spec, g.kind) + g).scale(N)
    integral = h.kind.exact and all(Fraction(a).denominator == 1 for _, a in h.items())
    if integral and h.kind is CoeffKind.EXACT_RATIONAL:
        h = h.to_int()
    return L1Unit(h, True, integral)


def make_positive(h: GroupRingElement) -> GroupRingElement:
    """h h*, self-adjoint and positive in NΓ."""
    return convolve(h, star(h))


# -- text format --------------------------------------------------------------

def _format_coeff(a, kind: CoeffKind) -> str:
    if kind is CoeffKind.FLOAT:
        return repr(float(a))
    if kind is CoeffKind.EXACT_RATIONAL:
        a = Fraction(a)
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
    return str(a)


def _parse_coeff(text: str):
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)


def format_element(f: GroupRingElement) -> str:
    """One ``coeff<TAB>encoding`` line per term, preceded by a kind header."""
    lines = [f"# coeff_kind: {f.kind.value}"]
    for g, a in sorted(f.items()):
        lines.append(f"{_format_coeff(a, f.kind)}\t{f.spec.format_element(g)}")
    return "\n".join(lines) + "\n"


def parse_element(text: str, spec: GroupSpec) -> GroupRingElement:
    """Inverse of :func:`format_element`; repeated encodings are summed."""
    kind = None
    coeffs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("coeff_kind:"):
                kind = CoeffKind(body.split(":", 1)[1].strip())
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<coeff> <element>', got {raw!r}")
        try:
            a = _parse_coeff(parts[0])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad coefficient {parts[0]!r}") from exc
        try:
            g = spec.parse_element(parts[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        coeffs[g] = coeffs.get(g, 0) + a
    return GroupRingElement(spec, coeffs, kind)
