"""Group families, word balls, boxes and Følner diagnostics.

Three kinds of finitely generated amenable groups are supported:

* ``Z^r``      elements are integer tuples of length ``r``;
* finite       elements are indices into a Cayley table;
* Heisenberg   elements are integer triples ``(a, b, c)`` standing for the
               upper unitriangular matrix [[1, a, c], [0, 1, b], [0, 0, 1]],
               so ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')``.

All objects are immutable.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Hashable, Iterable, Sequence

DEFAULT_SIZE_CAP = 20_000
_FULL_ASSOC_LIMIT = 64
_SAMPLED_ASSOC_TRIPLES = 10_000

Element = Hashable


class MalformedElementError(ValueError):
    """An element encoding does not belong to the group."""


class SizeCapError(RuntimeError):
    """A generated set would exceed the configured size cap."""


class GroupKind(enum.Enum):
    FREE_ABELIAN = "free_abelian"
    FINITE = "finite"
    HEISENBERG = "heisenberg"


@dataclass(frozen=True)
class GroupSpec:
    kind: GroupKind
    rank: int = 0
    table: tuple[tuple[int, ...], ...] = ()
    identity_index: int = 0

    def __post_init__(self):
        if self.kind is GroupKind.FREE_ABELIAN and self.rank < 1:
            raise ValueError(f"free abelian rank must be >= 1, got {self.rank}")
        if self.kind is GroupKind.FINITE:
            _check_cayley_table(self.table, self.identity_index)

    # -- constructors -----------------------------------------------------
    @classmethod
    def free_abelian(cls, rank: int) -> "GroupSpec":
        return cls(GroupKind.FREE_ABELIAN, rank=rank)

    @classmethod
    def heisenberg(cls) -> "GroupSpec":
        return cls(GroupKind.HEISENBERG)

    @classmethod
    def finite(cls, table: Sequence[Sequence[int]], identity_index: int = 0) -> "GroupSpec":
        return cls(
            GroupKind.FINITE,
            table=tuple(tuple(int(x) for x in row) for row in table),
            identity_index=int(identity_index),
        )

    @classmethod
    def cyclic(cls, order: int) -> "GroupSpec":
        return cls.finite([[(i + j) % order for j in range(order)] for i in range(order)], 0)

    # -- group law --------------------------------------------------------
    @property
    def order(self) -> int | None:
        """|Γ| for finite groups, ``None`` otherwise."""
        return len(self.table) if self.kind is GroupKind.FINITE else None

    def identity(self) -> Element:
        if self.kind is GroupKind.FREE_ABELIAN:
            return (0,) * self.rank
        if self.kind is GroupKind.HEISENBERG:
            return (0, 0, 0)
        return self.identity_index

    def mul(self, g, h):
        """Unchecked product; hot path for convolution and BFS."""
        if self.kind is GroupKind.FREE_ABELIAN:
            return tuple(a + b for a, b in zip(g, h))
        if self.kind is GroupKind.HEISENBERG:
            return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])
        return self.table[g][h]

    def inv(self, g):
        """Unchecked inverse."""
        if self.kind is GroupKind.FREE_ABELIAN:
            return tuple(-a for a in g)
        if self.kind is GroupKind.HEISENBERG:
            a, b, c = g
            return (-a, -b, a * b - c)
        return self._inverse_table[g]

    def check(self, g) -> Element:
        """Return ``g`` if it encodes an element of this group, else raise."""
        if self.kind is GroupKind.FINITE:
            if isinstance(g, bool) or not isinstance(g, int) or not 0 <= g < len(self.table):
                raise MalformedElementError(f"{g!r} is not an index in a group of order {len(self.table)}")
            return g
        want = self.rank if self.kind is GroupKind.FREE_ABELIAN else 3
        if (
            not isinstance(g, tuple)
            or len(g) != want
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in g)
        ):
            raise MalformedElementError(f"{g!r} is not an integer {want}-tuple")
        return g

    def multiply(self, g, h):
        return self.mul(self.check(g), self.check(h))

    def inverse(self, g):
        return self.inv(self.check(g))

    def standard_generators(self) -> "GeneratingSet":
        """{e, ±e_i} for Z^r, {e, x^±1, y^±1} for Heisenberg, all of Γ for finite groups."""
        if self.kind is GroupKind.FREE_ABELIAN:
            gens = []
            for i in range(self.rank):
                unit = tuple(1 if j == i else 0 for j in range(self.rank))
                gens.append(unit)
            return GeneratingSet.symmetric_closure(self, gens)
        if self.kind is GroupKind.HEISENBERG:
            return GeneratingSet.symmetric_closure(self, [(1, 0, 0), (0, 1, 0)])
        return GeneratingSet.symmetric_closure(self, range(len(self.table)))

    def parse_element(self, text: str) -> Element:
        """Parse ``(1,-2)`` / ``(a,b,c)`` / ``3`` (or ``(3)`` for finite groups)."""
        s = text.strip()
        inner = s[1:-1] if s.startswith("(") and s.endswith(")") else s
        try:
            parts = [int(p) for p in inner.replace(" ", "").split(",") if p != ""]
        except ValueError as exc:
            raise MalformedElementError(f"cannot parse group element {text!r}") from exc
        if self.kind is GroupKind.FINITE:
            if len(parts) != 1:
                raise MalformedElementError(f"cannot parse group element {text!r}")
            return self.check(parts[0])
        return self.check(tuple(parts))

    def format_element(self, g) -> str:
        if self.kind is GroupKind.FINITE:
            return f"({g})"
        return "(" + ",".join(str(x) for x in g) + ")"

    def __repr__(self):
        if self.kind is GroupKind.FREE_ABELIAN:
            return f"GroupSpec(Z^{self.rank})"
        if self.kind is GroupKind.HEISENBERG:
            return "GroupSpec(Heisenberg)"
        return f"GroupSpec(finite, order={len(self.table)})"

    # derived lookup, built lazily because the dataclass is frozen
    @property
    def _inverse_table(self) -> tuple[int, ...]:
        cached = self.__dict__.get("_inv_cache")
        if cached is None:
            e = self.identity_index
            cached = tuple(row.index(e) for row in self.table)
            object.__setattr__(self, "_inv_cache", cached)
        return cached


def _check_cayley_table(table, e) -> None:
    n = len(table)
    if n == 0:
        raise ValueError("empty Cayley table")
    full = set(range(n))
    if not 0 <= e < n:
        raise ValueError(f"identity index {e} out of range")
    for i, row in enumerate(table):
        if len(row) != n or set(row) != full:
            raise ValueError(f"row {i} is not a permutation of 0..{n - 1}")
    for j in range(n):
        if {table[i][j] for i in range(n)} != full:
            raise ValueError(f"column {j} is not a permutation of 0..{n - 1}")
    for i in range(n):
        if table[e][i] != i or table[i][e] != i:
            raise ValueError(f"index {e} does not act as identity on {i}")
    if n <= _FULL_ASSOC_LIMIT:
        triples: Iterable = ((a, b, c) for a in range(n) for b in range(n) for c in range(n))
    else:
        rng = random.Random(0)
        triples = (
            (rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(_SAMPLED_ASSOC_TRIPLES)
        )
    for a, b, c in triples:
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise ValueError(f"table is not associative at ({a}, {b}, {c})")


def multiply(g, h, spec: GroupSpec):
    return spec.multiply(g, h)


def load_cayley_table(path: str | Path) -> GroupSpec:
    """Read a finite group: first line ``order identity``, then ``order`` rows of indices."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty Cayley table file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: first line must be '<order> <identity index>'")
    n, e = int(header[0]), int(header[1])
    rows = [[int(x) for x in ln.split()] for ln in lines[1:]]
    if len(rows) != n:
        raise ValueError(f"{path}: expected {n} table rows, found {len(rows)}")
    return GroupSpec.finite(rows, e)


def dump_cayley_table(spec: GroupSpec) -> str:
    rows = [" ".join(str(x) for x in row) for row in spec.table]
    return "\n".join([f"{len(spec.table)} {spec.identity_index}", *rows]) + "\n"


@dataclass(frozen=True)
class GeneratingSet:
    spec: GroupSpec
    elements: tuple

    def __post_init__(self):
        members = set(self.elements)
        if self.spec.identity() not in members:
            raise ValueError("generating set must contain the identity")
        for s in self.elements:
            self.spec.check(s)
            if self.spec.inv(s) not in members:
                raise ValueError(f"generating set is not closed under inverses: {s!r}")

    @classmethod
    def symmetric_closure(cls, spec: GroupSpec, gens: Iterable) -> "GeneratingSet":
        out = {spec.identity()}
        for g in gens:
            spec.check(g)
            out.add(g)
            out.add(spec.inv(g))
        return cls(spec, tuple(sorted(out)))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class FoelnerSet:
    """An ordered finite subset of Γ; the order fixes the matrix basis."""

    spec: GroupSpec
    elements: tuple
    label: int | None = None
    index_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.elements:
            raise ValueError("a Følner set must be nonempty")
        index = {g: i for i, g in enumerate(self.elements)}
        if len(index) != len(self.elements):
            raise ValueError("duplicate elements in Følner set")
        object.__setattr__(self, "index_of", index)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.index_of

    def __iter__(self):
        return iter(self.elements)


def ball_layers(spec: GroupSpec, S: GeneratingSet, n: int, cap: int = DEFAULT_SIZE_CAP) -> list[list]:
    """BFS layers of the right Cayley graph: layer k holds elements of word length exactly k."""
    if n < 0:
        raise ValueError("ball radius must be nonnegative")
    e = spec.identity()
    seen = {e}
    layers = [[e]]
    gens = [s for s in S if s != e]
    for _ in range(n):
        new = set()
        for g in layers[-1]:
            for s in gens:
                h = spec.mul(g, s)
                if h not in seen:
                    new.add(h)
        if not new:
            break
        seen.update(new)
        if len(seen) > cap:
            raise SizeCapError(f"ball exceeds size cap {cap}")
        layers.append(sorted(new))
    return layers


def ball(spec: GroupSpec, S: GeneratingSet, n: int, cap: int = DEFAULT_SIZE_CAP) -> FoelnerSet:
    """S^n in BFS layer order, lexicographic within a layer."""
    layers = ball_layers(spec, S, n, cap)
    return FoelnerSet(spec, tuple(g for layer in layers for g in layer), label=n)


def box(rank: int, n: int, cap: int = DEFAULT_SIZE_CAP) -> FoelnerSet:
    """[0, n)^rank in lexicographic order."""
    if rank < 1 or n < 1:
        raise ValueError("box needs rank >= 1 and n >= 1")
    if n**rank > cap:
        raise SizeCapError(f"box of {n}^{rank} points exceeds size cap {cap}")
    pts = tuple(itertools.product(range(n), repeat=rank))
    return FoelnerSet(GroupSpec.free_abelian(rank), pts, label=n)


@dataclass(frozen=True)
class DefectRecord:
    ratio: Fraction
    strong_value: float
    boundary: int


def foelner_defect(F: FoelnerSet, K: Iterable, spec: GroupSpec | None = None) -> DefectRecord:
    """|FK \\ F| / |F| and the strong-Følner weight ratio * log(1 + |FK \\ F|)."""
    spec = spec or F.spec
    K = [spec.check(k) for k in K]
    outside = {spec.mul(f, k) for f in F.elements for k in K}
    outside.difference_update(F.index_of)
    b = len(outside)
    ratio = Fraction(b, len(F))
    return DefectRecord(ratio, float(ratio) * math.log1p(b), b)


def translation_defect(F: FoelnerSet, gamma, spec: GroupSpec | None = None) -> int:
    """|F γ \\ F|."""
    spec = spec or F.spec
    return sum(1 for f in F.elements if spec.mul(f, gamma) not in F.index_of)


@dataclass(frozen=True)
class GrowthRecord:
    n: int
    size: int
    eq29_value: float
    eq28_value: float


def growth_series(spec: GroupSpec, S: GeneratingSet, n_max: int, cap: int = DEFAULT_SIZE_CAP) -> list[GrowthRecord]:
    """Per radius n: |S^n|, (|S^{n+1}|/|S^n| - 1) log|S^n| and max_s |S^n s \\ S^n|/|S^n| log|S^n|."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    layers = ball_layers(spec, S, n_max + 1, cap)
    sizes = []
    total = 0
    for k in range(n_max + 2):
        total += len(layers[k]) if k < len(layers) else 0
        sizes.append(total)
    out = []
    for n in range(1, n_max + 1):
        F = FoelnerSet(spec, tuple(g for layer in layers[: n + 1] for g in layer), label=n)
        size = sizes[n]
        log_size = math.log(size)
        eq29 = (sizes[n + 1] / size - 1.0) * log_size
        worst = max(translation_defect(F, s, spec) for s in S)
        out.append(GrowthRecord(n, size, eq29, worst / size * log_size))
    return out
