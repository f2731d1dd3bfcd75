"""Mahler measures of Laurent polynomials over the torus T^n (Γ = Z^n).

The quadrature is the tensor trapezoid rule at the m-th roots of unity.
Since ``z^ν`` at a node only depends on ``ν mod m``, the node values are a
single inverse FFT of the coefficient array folded modulo m, which is exact
(no aliasing error) and costs O(m^n log m).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .group_core import GroupKind
from .group_ring import GroupRingElement

DEFAULT_GRID_CAP = 1 << 24
UNIT_CIRCLE_BAND = 1e-8


class NodeHitError(ArithmeticError):
    """The polynomial vanishes (to rounding) at a quadrature node."""


class NoCertificateError(ArithmeticError):
    """A root lies too close to the unit circle to trust the Jensen formula."""


@dataclass(frozen=True)
class TorusGrid:
    dim: int
    m: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("torus dimension must be >= 1")
        if self.m < 2:
            raise ValueError("need at least 2 points per dimension")
        if self.m**self.dim > DEFAULT_GRID_CAP:
            raise ValueError(f"{self.m}^{self.dim} grid points exceed cap {DEFAULT_GRID_CAP}")

    @property
    def size(self) -> int:
        return self.m**self.dim

    def angles(self) -> np.ndarray:
        """Node angles 2πj/m, j = 0..m-1 (shared by every axis)."""
        return 2 * np.pi * np.arange(self.m) / self.m


def _require_free_abelian(f: GroupRingElement) -> int:
    if f.spec.kind is not GroupKind.FREE_ABELIAN:
        raise ValueError(f"Mahler measures need Γ = Z^n, got {f.spec!r}")
    return f.spec.rank


def torus_values(f: GroupRingElement, grid: TorusGrid) -> np.ndarray:
    """f(ω^{j_1}, ..., ω^{j_n}) on the grid, row-major in (j_1, ..., j_n)."""
    n = _require_free_abelian(f)
    if n != grid.dim:
        raise ValueError(f"grid dimension {grid.dim} does not match rank {n}")
    m = grid.m
    folded = np.zeros((m,) * n, dtype=complex)
    for nu, a in f.items():
        folded[tuple(k % m for k in nu)] += float(a)
    return np.fft.ifftn(folded) * grid.size


def _pairwise_sum(x: np.ndarray) -> float:
    # numpy reduces contiguous float arrays pairwise in a fixed order
    return float(np.sum(np.ascontiguousarray(x, dtype=float).ravel()))


def mahler_quadrature(f: GroupRingElement, grid: TorusGrid) -> float:
    """(1/m^n) Σ log|f| over the grid nodes."""
    if not f:
        raise ValueError("the Mahler measure of 0 is undefined")
    vals = np.abs(torus_values(f, grid))
    scale = float(sum(abs(float(a)) for _, a in f.items()))
    if vals.min() <= 1e-13 * scale:
        raise NodeHitError("f vanishes at a quadrature node; certify non-vanishing or change m")
    return _pairwise_sum(np.log(vals)) / grid.size


def _laurent_1d(f: GroupRingElement) -> tuple[int, list[float]]:
    """(lowest exponent, coefficients from the lowest exponent upward)."""
    if _require_free_abelian(f) != 1:
        raise ValueError("jensen_1d needs a one-variable Laurent polynomial")
    if not f:
        raise ValueError("the Mahler measure of 0 is undefined")
    exps = [nu[0] for nu in f.support]
    lo, hi = min(exps), max(exps)
    coeffs = [0.0] * (hi - lo + 1)
    for nu, a in f.items():
        coeffs[nu[0] - lo] = float(a)
    return lo, coeffs


def companion_roots(coeffs_low_to_high: list[float]) -> np.ndarray:
    """Roots of Σ c_k t^k as eigenvalues of the companion matrix (LAPACK balances it)."""
    c = np.asarray(coeffs_low_to_high, dtype=float)
    d = len(c) - 1
    if d < 1:
        return np.zeros(0, dtype=complex)
    C = np.zeros((d, d))
    C[1:, :-1] = np.eye(d - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(C)


def jensen_1d(f: GroupRingElement, band: float = UNIT_CIRCLE_BAND) -> float:
    """m(f) = log|leading coeff| + Σ log max(1, |root|)."""
    _, coeffs = _laurent_1d(f)
    roots = companion_roots(coeffs)
    mods = np.abs(roots)
    if np.any(np.abs(mods - 1.0) < band):
        raise NoCertificateError(f"a root lies within {band} of the unit circle")
    return math.log(abs(coeffs[-1])) + math.fsum(math.log(r) for r in mods if r > 1.0)


def lipschitz_bound(f: GroupRingElement) -> float:
    """2π Σ|a_ν| ||ν||_1, a Lipschitz constant of f in torus coordinates t ∈ [0,1)^n."""
    _require_free_abelian(f)
    return 2 * math.pi * math.fsum(abs(float(a)) * sum(abs(k) for k in nu) for nu, a in f.items())


@dataclass(frozen=True)
class NonvanishingCertificate:
    certified: bool
    m: int
    grid_min: float
    lipschitz_bound: float
    threshold: float

    def to_dict(self) -> dict:
        return asdict(self)


def nonvanishing_certificate(f: GroupRingElement, m: int) -> NonvanishingCertificate:
    """Certify |f| > 0 on T^n from the grid minimum and a Lipschitz bound.

    Every point of the torus is within √n/(2m) of a node (coordinates in
    [0,1)), so ``grid_min > L √n / (2m)`` forces f to be nowhere zero.
    Refusal is not a proof that f vanishes.
    """
    n = _require_free_abelian(f)
    grid = TorusGrid(n, m)
    gmin = float(np.abs(torus_values(f, grid)).min()) if f else 0.0
    L = lipschitz_bound(f)
    threshold = L * math.sqrt(n) / (2 * m)
    # the node values carry FFT rounding of order eps * ||f||_1
    slack = 64 * np.finfo(float).eps * sum(abs(float(a)) for _, a in f.items())
    return NonvanishingCertificate(bool(gmin - slack > threshold), m, gmin, L, threshold)


def certify_nonvanishing(
    f: GroupRingElement, m_values=(16, 64, 256, 1024, 4096), max_points: int = 1 << 20
) -> NonvanishingCertificate:
    """First successful certificate over increasing grids; the last refusal otherwise.

    Grids with more than ``max_points`` nodes are skipped (the coarsest grid
    is always tried).
    """
    n = _require_free_abelian(f)
    cert = None
    for m in m_values:
        if cert is not None and m**n > max_points:
            break
        cert = nonvanishing_certificate(f, m)
        if cert.certified:
            return cert
    return cert


def mahler_report(f: GroupRingElement, m: int) -> dict:
    """JSON-ready {value, grid, certified, lipschitz_bound, grid_min}."""
    n = _require_free_abelian(f)
    grid = TorusGrid(n, m)
    cert = nonvanishing_certificate(f, m)
    try:
        value = mahler_quadrature(f, grid)
    except NodeHitError:
        value = None
    return {
        "value": value,
        "grid": {"dim": n, "points_per_dim": m},
        "certified": cert.certified,
        "lipschitz_bound": cert.lipschitz_bound,
        "grid_min": cert.grid_min,
    }
