import itertools
import math

import pytest
from hypothesis import strategies as st

from fkdet.group_core import GroupKind, GroupSpec
from fkdet.group_ring import GroupRingElement

Z1 = GroupSpec.free_abelian(1)
Z2 = GroupSpec.free_abelian(2)
HEIS = GroupSpec.heisenberg()
C2 = GroupSpec.cyclic(2)

# closed form of the Mahler measure of 5 + z + 1/z: larger root of t^2 - 5t + 1
LOG_5_Z = math.log((5 + math.sqrt(21)) / 2)


def symmetric_group_3() -> GroupSpec:
    """S_3 built from permutation composition, independent of any table helper."""
    perms = sorted(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    # (p q)(i) = p(q(i))
    table = [[index[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms]
    return GroupSpec.finite(table, index[(0, 1, 2)])


S3 = symmetric_group_3()


def z1(coeffs: dict) -> GroupRingElement:
    """Laurent polynomial on Z from {exponent: coefficient}."""
    return GroupRingElement(Z1, {(k,): a for k, a in coeffs.items()})


def tridiag_det(diag: int, off: int, n: int) -> int:
    """det of the n x n tridiagonal Toeplitz matrix, by the three-term recurrence."""
    prev, cur = 1, diag
    for _ in range(n - 1):
        prev, cur = cur, diag * cur - off * off * prev
    return cur if n else 1


def elements_of(spec: GroupSpec, radius: int = 3):
    if spec.order is not None:
        return st.integers(0, spec.order - 1)
    k = st.integers(-radius, radius)
    if spec.kind is GroupKind.HEISENBERG:
        return st.tuples(k, k, k)
    return st.tuples(*([k] * spec.rank))


def ring_elements(spec: GroupSpec, max_terms: int = 4, coeff=st.integers(-5, 5)):
    return st.dictionaries(elements_of(spec), coeff, max_size=max_terms).map(lambda d: GroupRingElement(spec, d))


# one "criterion k: PASS/FAIL ..." line per acceptance check, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


SPECS = [Z1, Z2, HEIS, C2, S3]
SPEC_IDS = ["Z1", "Z2", "heisenberg", "C2", "S3"]


@pytest.fixture(params=SPECS, ids=SPEC_IDS)
def spec(request):
    return request.param
