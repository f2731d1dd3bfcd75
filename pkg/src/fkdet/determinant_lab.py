"""Estimators of log det_NΓ and tr_NΓ with convergence reports.

Four routes to the same number:

* ``foelner_logdet``       (1/|F|) log det f_F on a Følner sequence, f positive;
* ``lattice_index``        the integer |Z[F] / f_F Z[F]| = |det f_F|;
* ``trace_series_logdet``  log c + Σ (-1)^{ν-1}/ν tr_e(g^ν) for f = c(1+g), ||g||_1 < 1;
* ``lueck_trace``          (1/|F|) tr Q(f_F) against the exact tr_e(Q(f)).

Every estimator returns an :class:`EstimateReport` holding the raw
per-step sequence; nothing is extrapolated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .group_core import FoelnerSet, GroupKind
from .group_ring import (
    CoeffKind,
    CoeffKindError,
    GroupRingElement,
    l1_norm,
    make_positive,
    trace_e,
    trace_of_product,
)
from .mahler import certify_nonvanishing, torus_values, TorusGrid
from .snf import SmithForm, exact_det, snf
from .truncation import TruncatedMatrix, assemble


class NotPositiveError(ArithmeticError):
    """A Cholesky pivot was not positive: the positivity certificate was wrong."""


class InfiniteIndexError(ArithmeticError):
    """f_F is singular, so Z[F] / f_F Z[F] is infinite."""


class SeriesDivergentError(ValueError):
    pass


class NotSelfAdjointError(ValueError):
    pass


class NotCertifiedError(ValueError):
    """No positivity certificate could be produced for f."""


@dataclass
class Step:
    n: int
    size: int
    value: float
    error_bound: float | None = None
    exact: Fraction | int | None = None


@dataclass
class EstimateReport:
    method: str
    steps: list[Step]
    error_bound: float | None = None
    notes: list[str] = field(default_factory=list)
    reference: float | None = None

    @property
    def final(self) -> float:
        if not self.steps:
            raise ValueError(f"{self.method}: no steps were computed")
        return self.steps[-1].value

    def to_dict(self) -> dict:
        steps = []
        for s in self.steps:
            d = asdict(s)
            if s.exact is not None:
                d["exact"] = str(s.exact)
            else:
                d.pop("exact")
            steps.append(d)
        out = {
            "method": self.method,
            "steps": steps,
            "final": self.final if self.steps else None,
            "error_bound": self.error_bound,
            "notes": list(self.notes),
        }
        if self.reference is not None:
            out["reference"] = self.reference
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "set_size", "value", "error_bound"])
        for s in self.steps:
            eb = "" if s.error_bound is None else format(s.error_bound, ".17g")
            w.writerow([s.n, s.size, format(s.value, ".17g"), eb])
        return buf.getvalue()


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _label(F: FoelnerSet, i: int) -> int:
    return F.label if F.label is not None else i


# -- positivity ---------------------------------------------------------------

@dataclass(frozen=True)
class PositivityCertificate:
    route: str  # "hh*", "contraction" or "torus-symbol"
    details: dict = field(default_factory=dict)


def certify_positive(f: GroupRingElement, factor: GroupRingElement | None = None) -> PositivityCertificate:
    """Produce evidence that f is a positive element of NΓ, or raise NotCertifiedError.

    Routes: f = h h* for a supplied ``factor`` h; f = c(1+g) with c > 0,
    g = g* and ||g||_1 < 1; or, on Z^n, a real symbol certified nowhere zero
    and positive at one node.
    """
    if not f.is_self_adjoint():
        raise NotSelfAdjointError("positivity needs f = f*")
    if factor is not None:
        hh = make_positive(factor)
        same = hh == f if f.kind.exact and hh.kind.exact else _close(hh.to_float(), f.to_float())
        if not same:
            raise NotCertifiedError("supplied factor h does not satisfy h h* = f")
        return PositivityCertificate("hh*", {"factor_support": len(factor)})
    c = trace_e(f)
    if c > 0:
        q = l1_norm(f - c) / c
        if q < 1:
            return PositivityCertificate("contraction", {"c": float(c), "g_l1": float(q)})
    if f.spec.kind is GroupKind.FREE_ABELIAN:
        cert = certify_nonvanishing(f)
        if cert is not None and cert.certified:
            probe = torus_values(f, TorusGrid(f.spec.rank, 2)).real.ravel()[0]
            if probe > 0:
                return PositivityCertificate("torus-symbol", {"m": cert.m, "grid_min": cert.grid_min})
    raise NotCertifiedError("no positivity certificate found; supply factor=h if f = h h*")


def _close(a: GroupRingElement, b: GroupRingElement, tol: float = 1e-12) -> bool:
    return l1_norm(a - b) <= tol * max(1.0, l1_norm(a))


# -- log det of truncations ---------------------------------------------------

def logdet_spd(M: TruncatedMatrix) -> float:
    """log det of a symmetric positive definite truncation from its Cholesky pivots."""
    try:
        if M.banded:
            w = M.bandwidth
            cb = scipy.linalg.cholesky_banded(M.band[: w + 1], lower=False)
            diag = cb[w]
        else:
            L = scipy.linalg.cholesky(M.to_float(), lower=True)
            diag = np.diag(L)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveError(f"Cholesky failed on |F| = {M.size}: {exc}") from exc
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise NotPositiveError(f"non-positive pivot on |F| = {M.size}")
    return 2.0 * math.fsum(np.log(diag).tolist())


def foelner_logdet(
    f: GroupRingElement,
    seq: Sequence[FoelnerSet],
    certificate: PositivityCertificate | None = None,
    workers: int = 1,
) -> EstimateReport:
    """(1/|F_n|) log det f_{F_n} along a Følner sequence."""
    if not f.is_self_adjoint():
        raise NotSelfAdjointError("foelner_logdet needs f = f*")
    if certificate is None:
        certificate = certify_positive(f)

    def one(item):
        i, F = item
        value = logdet_spd(assemble(f, F)) / len(F)
        return Step(_label(F, i), len(F), value)

    steps = _map(one, list(enumerate(seq)), workers)
    return EstimateReport("foelner_logdet", steps, None, [f"positivity: {certificate.route}"])


# -- lattice index ------------------------------------------------------------

LATTICE_CROSS_CHECK_LIMIT = 200


def lattice_index(f: GroupRingElement, F: FoelnerSet, cross_check_limit: int = LATTICE_CROSS_CHECK_LIMIT) -> int:
    """|Z[F] / f_F Z[F]| = |det f_F|, cross-checked against the Smith form for small F.

    The Smith form runs modulo |det|, so the check confirms that the
    elimination splits the lattice into cyclic factors whose orders multiply
    back to the determinant.
    """
    if f.kind is not CoeffKind.EXACT_INT:
        raise CoeffKindError("lattice_index needs integer coefficients")
    M = assemble(f, F)
    det = exact_det(M.int_rows())
    if det == 0:
        raise InfiniteIndexError(f"f_F is singular on |F| = {len(F)}")
    if len(F) <= cross_check_limit:
        prod = math.prod(snf(M.int_lists(), modulus=det).divisors)
        if prod != abs(det):
            raise RuntimeError(f"Smith form product {prod} != |det| {abs(det)}")
    return abs(det)


def lattice_index_sequence(f: GroupRingElement, seq: Sequence[FoelnerSet], workers: int = 1) -> EstimateReport:
    """log(index)/|F_n| along the sequence; singular truncations are skipped with a note."""

    def one(item):
        i, F = item
        try:
            idx = lattice_index(f, F)
        except InfiniteIndexError:
            return i, F, None
        return i, F, idx

    notes = []
    steps = []
    for i, F, idx in _map(one, list(enumerate(seq)), workers):
        if idx is None:
            notes.append(f"skipped n={_label(F, i)}: singular truncation (infinite index)")
            continue
        steps.append(Step(_label(F, i), len(F), math.log(idx) / len(F), exact=idx))
    return EstimateReport("lattice_index", steps, None, notes)


# -- trace power series -------------------------------------------------------

def series_tail_bound(q: float, M: int) -> float:
    """Σ_{ν>M} q^ν / ν  <=  q^{M+1} / ((M+1)(1-q))."""
    return q ** (M + 1) / ((M + 1) * (1.0 - q))


def decompose(f: GroupRingElement) -> tuple[float, GroupRingElement, float]:
    """f = c(1 + g) with c the identity coefficient; returns (c, g as float, ||g||_1)."""
    c = trace_e(f)
    if not c > 0:
        raise SeriesDivergentError(f"identity coefficient {c} is not positive")
    rest = f - c
    q = float(Fraction(l1_norm(rest)) / Fraction(c)) if f.kind.exact else l1_norm(rest) / c
    if not q < 1:
        raise SeriesDivergentError(f"||f/c - 1||_1 = {q} is not < 1")
    g = rest.to_float().scale(1.0 / float(c))
    return float(c), g, q


def trace_series_logdet(f: GroupRingElement, tol: float = 1e-10, max_terms: int = 1000) -> EstimateReport:
    """log det_NΓ f = log c + Σ_ν (-1)^{ν-1}/ν tr_e(g^ν) with a rigorous tail bound.

    tr_e(g^ν) is read off as tr_e(g^a g^b) with a + b = ν, so only powers up
    to ⌈ν/2⌉ are ever formed.
    """
    if not f.is_self_adjoint():
        raise NotSelfAdjointError("trace_series_logdet needs f = f*")
    c, g, q = decompose(f)
    terms = 0
    while terms < max_terms and series_tail_bound(q, terms) >= tol:
        terms += 1
    notes = [f"c = {c!r}, ||g||_1 = {q!r}"]
    if series_tail_bound(q, terms) >= tol:
        notes.append(f"max_terms={max_terms} reached before tail < tol")
    powers = [GroupRingElement.one(f.spec, CoeffKind.FLOAT)]
    partial = [math.log(c)]
    steps = [Step(0, 1, partial[0], series_tail_bound(q, 0))]
    for nu in range(1, terms + 1):
        a = (nu + 1) // 2
        while len(powers) <= a:
            powers.append(powers[-1] * g)
        t = trace_of_product(powers[a], powers[nu - a])
        partial.append((-1) ** (nu - 1) * t / nu)
        steps.append(Step(nu, len(powers[a]), math.fsum(partial), series_tail_bound(q, nu)))
    report = EstimateReport("trace_series", steps, series_tail_bound(q, terms), notes)
    return report


# -- Lück trace approximation -------------------------------------------------

def _poly_coeffs(Q) -> list:
    coef = getattr(Q, "coef", Q)
    out = [c.item() if isinstance(c, np.generic) else c for c in coef]
    if not out:
        raise ValueError("empty polynomial")
    return out


def _sparse_matmul(A: list[dict], B: list[dict]) -> list[dict]:
    out = []
    for row in A:
        acc: dict = {}
        for j, v in row.items():
            for k, w in B[j].items():
                acc[k] = acc.get(k, 0) + v * w
        out.append({k: v for k, v in acc.items() if v != 0})
    return out


def _trace_of_product_rows(A: list[dict], B: list[dict], exact: bool):
    vals = []
    for i, row in enumerate(A):
        for j, v in row.items():
            w = B[j].get(i)
            if w:
                vals.append(v * w)
    return sum(vals, 0) if exact else math.fsum(vals)


def matrix_poly_trace(M: TruncatedMatrix, Q) -> Fraction | int | float:
    """tr Q(M) from sparse powers of M; exact when M and Q are exact."""
    coeffs = _poly_coeffs(Q)
    exact = M.kind.exact and all(isinstance(c, (int, Fraction)) for c in coeffs)
    rows: list[dict] = [{} for _ in range(M.size)]
    for i, j, v in M.entries_coo:
        rows[i][j] = v if exact else float(v)
    deg = len(coeffs) - 1
    ident = [{i: 1} for i in range(M.size)]
    powers = [ident]
    half = (deg + 1) // 2
    for _ in range(half):
        powers.append(_sparse_matmul(powers[-1], rows))
    total = []
    for k, q in enumerate(coeffs):
        if q == 0:
            continue
        a = (k + 1) // 2
        tk = _trace_of_product_rows(powers[a], powers[k - a], exact)
        total.append(q * tk)
    return sum(total, 0) if exact else math.fsum(float(x) for x in total)


def group_ring_poly_trace(f: GroupRingElement, Q):
    """tr_e(Q(f)) = Σ_k q_k tr_e(f^k), exact for exact f and Q."""
    coeffs = _poly_coeffs(Q)
    exact = f.kind.exact and all(isinstance(c, (int, Fraction)) for c in coeffs)
    base = f if exact else f.to_float()
    deg = len(coeffs) - 1
    powers = [GroupRingElement.one(f.spec, base.kind)]
    for _ in range((deg + 1) // 2):
        powers.append(powers[-1] * base)
    total = []
    for k, q in enumerate(coeffs):
        if q == 0:
            continue
        a = (k + 1) // 2
        total.append(q * trace_of_product(powers[a], powers[k - a]))
    return sum(total, 0) if exact else math.fsum(float(x) for x in total)


def lueck_trace(f: GroupRingElement, Q, seq: Sequence[FoelnerSet], workers: int = 1) -> EstimateReport:
    """(1/|F_n|) tr Q(f_{F_n}) along the sequence, with the exact limit tr_e(Q(f)) as reference."""
    limit = group_ring_poly_trace(f, Q)

    def one(item):
        i, F = item
        t = matrix_poly_trace(assemble(f, F), Q)
        if isinstance(t, (int, Fraction)):
            exact = Fraction(t, len(F))
            return Step(_label(F, i), len(F), float(exact), abs(float(exact - limit)), exact)
        v = t / len(F)
        return Step(_label(F, i), len(F), v, abs(v - float(limit)))

    steps = _map(one, list(enumerate(seq)), workers)
    report = EstimateReport("lueck_trace", steps, None, [f"exact limit tr_e(Q(f)) = {limit}"], float(limit))
    return report


__all__ = [
    "EstimateReport",
    "Step",
    "PositivityCertificate",
    "certify_positive",
    "logdet_spd",
    "foelner_logdet",
    "lattice_index",
    "lattice_index_sequence",
    "trace_series_logdet",
    "series_tail_bound",
    "lueck_trace",
    "matrix_poly_trace",
    "group_ring_poly_trace",
    "snf",
    "SmithForm",
    "NotPositiveError",
    "InfiniteIndexError",
    "SeriesDivergentError",
    "NotSelfAdjointError",
    "NotCertifiedError",
]
