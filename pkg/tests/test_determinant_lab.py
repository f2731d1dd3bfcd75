import json
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import C2, HEIS, LOG_5_Z, S3, Z1, Z2, tridiag_det, z1
from fkdet.determinant_lab import (
    EstimateReport,
    InfiniteIndexError,
    NotCertifiedError,
    NotPositiveError,
    NotSelfAdjointError,
    SeriesDivergentError,
    Step,
    certify_positive,
    foelner_logdet,
    lattice_index,
    lattice_index_sequence,
    lueck_trace,
    series_tail_bound,
    trace_series_logdet,
)
from fkdet.finite_entropy import whole_group
from fkdet.group_core import FoelnerSet, ball, box
from fkdet.group_ring import CoeffKindError, GroupRingElement, make_positive
from fkdet.snf import bareiss_det
from fkdet.truncation import assemble

F5 = z1({0: 5, 1: 1, -1: 1})


# -- Følner truncation ----------------------------------------------------------

def test_foelner_logdet_z1_converges():
    seq = [box(1, n) for n in range(100, 1001, 100)]
    rep = foelner_logdet(F5, seq)
    assert [s.n for s in rep.steps] == list(range(100, 1001, 100))
    errs = [abs(s.value - LOG_5_Z) for s in rep.steps]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 2e-4
    # second oracle: tridiagonal determinant recurrence
    for s in rep.steps[:3]:
        assert s.value == pytest.approx(math.log(tridiag_det(5, 1, s.size)) / s.size, rel=1e-12)
    assert rep.final == rep.steps[-1].value


def test_foelner_logdet_identity_and_finite():
    e = GroupRingElement.one(HEIS)
    rep = foelner_logdet(e, [ball(HEIS, HEIS.standard_generators(), n) for n in range(3)])
    assert all(s.value == 0 for s in rep.steps)
    t = GroupRingElement(C2, {0: 3, 1: 1})
    assert foelner_logdet(t, [whole_group(C2)]).final == pytest.approx(0.5 * math.log(8), abs=1e-14)


def test_foelner_logdet_refuses_uncertified_or_wrong_certificate():
    with pytest.raises(NotSelfAdjointError):
        foelner_logdet(z1({0: 5, 1: 1}), [box(1, 5)])
    with pytest.raises(NotCertifiedError):
        foelner_logdet(z1({0: 1, 1: 1, -1: 1}), [box(1, 5)])
    with pytest.raises(NotCertifiedError):
        certify_positive(F5, factor=z1({0: 5, 1: 1}))
    # a wrong certificate object is exposed by a failing factorization
    bogus = certify_positive(F5)
    with pytest.raises(NotPositiveError):
        foelner_logdet(z1({0: 1, 1: 2, -1: 2}), [box(1, 10)], certificate=bogus)


def test_positivity_routes():
    assert certify_positive(F5).route == "contraction"
    h = z1({0: 1, 1: 3})
    assert certify_positive(make_positive(h), factor=h).route == "hh*"
    # symbol 4 + 4cos θ + 2cos 2θ > 0, while ||f - 4||_1 = 6 rules out the contraction route
    f = z1({0: 4, 1: 2, -1: 2, 2: 1, -2: 1})
    assert certify_positive(f).route == "torus-symbol"


def test_foelner_threads_deterministic():
    seq = [box(1, n) for n in (50, 100, 150)]
    a = foelner_logdet(F5, seq).to_json()
    b = foelner_logdet(F5, seq, workers=3).to_json()
    assert a == b


# -- lattice index --------------------------------------------------------------

def test_lattice_index_examples():
    assert lattice_index(GroupRingElement(C2, {0: 3, 1: 1}), whole_group(C2)) == 8
    assert lattice_index(GroupRingElement.one(Z2), box(2, 4)) == 1
    assert lattice_index(F5, box(1, 3)) == 115


def test_lattice_index_rejects_floats_and_singular():
    with pytest.raises(CoeffKindError):
        lattice_index(F5.to_float(), box(1, 3))
    with pytest.raises(CoeffKindError):
        lattice_index(F5 / 2, box(1, 3))
    with pytest.raises(InfiniteIndexError):
        lattice_index(GroupRingElement(C2, {0: 1, 1: 1}), whole_group(C2))


def test_lattice_sequence_skips_singular_truncations():
    f = z1({0: 1, 1: 1, -1: 1})  # det of tridiag(1;1) vanishes for n = 2 mod 3
    rep = lattice_index_sequence(f, [box(1, n) for n in (1, 2, 3, 4, 5)])
    assert [s.n for s in rep.steps] == [1, 3, 4]
    assert any("n=2" in note for note in rep.notes)
    assert [s.exact for s in rep.steps] == [abs(tridiag_det(1, 1, n)) for n in (1, 3, 4)]


def test_lattice_matches_float_logdet():
    seq = [box(1, n) for n in (10, 50, 120)]
    lat = lattice_index_sequence(F5, seq)
    flt = foelner_logdet(F5, seq)
    for a, b in zip(lat.steps, flt.steps):
        assert a.value == pytest.approx(b.value, abs=1e-9)


def test_index_multiplicative_on_finite_groups():
    f = GroupRingElement(S3, {0: 4, 1: 1, 3: -1})
    g = GroupRingElement(S3, {0: 3, 2: 1, 5: 1})
    F = whole_group(S3)
    Mf, Mg, Mfg = (assemble(x, F).int_lists() for x in (f, g, f * g))
    assert bareiss_det(Mfg) == bareiss_det(Mf) * bareiss_det(Mg)
    assert lattice_index(f * g, F) == lattice_index(f, F) * lattice_index(g, F)


# -- trace series ---------------------------------------------------------------

def test_series_z1():
    rep = trace_series_logdet(F5, tol=1e-10)
    assert rep.error_bound < 1e-10
    assert abs(rep.final - LOG_5_Z) <= rep.error_bound + 1e-13
    # stops at the first M with q^{M+1}/((M+1)(1-q)) < tol
    M = rep.steps[-1].n
    assert series_tail_bound(0.4, M) < 1e-10 <= series_tail_bound(0.4, M - 1)
    assert M <= 55


def test_series_tail_bound_dominates_true_tail():
    q = 0.4
    for M in (1, 5, 20):
        true_tail = math.fsum(q**nu / nu for nu in range(M + 1, 400))
        assert true_tail <= series_tail_bound(q, M)


def test_series_constant():
    rep = trace_series_logdet(GroupRingElement(Z1, {(0,): 2}))
    assert rep.final == math.log(2)
    assert rep.error_bound == 0


def test_series_refusals():
    with pytest.raises(SeriesDivergentError):
        trace_series_logdet(z1({0: 2, 1: 1, -1: 1}))
    with pytest.raises(SeriesDivergentError):
        trace_series_logdet(z1({0: -5, 1: 1, -1: 1}))
    with pytest.raises(NotSelfAdjointError):
        trace_series_logdet(z1({0: 5, 1: 1}))


def test_series_finite_group_matches_exact():
    t = GroupRingElement(C2, {0: 3, 1: 1})
    rep = trace_series_logdet(t, tol=1e-14)
    assert rep.final == pytest.approx(0.5 * math.log(8), abs=1e-13)


def test_series_matches_foelner_on_heisenberg():
    f = make_positive(GroupRingElement(HEIS, {(0, 0, 0): 10, (1, 0, 0): 1, (0, 1, 0): 1}))
    series = trace_series_logdet(f, tol=1e-10)
    balls = foelner_logdet(f, [ball(HEIS, HEIS.standard_generators(), n) for n in (3, 4, 5)])
    for s in balls.steps:
        assert abs(s.value - series.final) <= series.error_bound + 5e-2
    errs = [abs(s.value - series.final) for s in balls.steps]
    assert errs[-1] < errs[0]


# -- Lück approximation ---------------------------------------------------------

def test_lueck_examples():
    z = z1({1: 1})
    rep = lueck_trace(z, [0, 1], [box(1, n) for n in (5, 50)])
    assert rep.reference == 0 and all(s.exact == 0 for s in rep.steps)
    s = z1({1: 1, -1: 1})
    rep = lueck_trace(s, [0, 0, 1], [box(1, n) for n in (10, 100, 1000)])
    assert rep.reference == 2
    assert [st.exact for st in rep.steps] == [Fraction(2 * (n - 1), n) for n in (10, 100, 1000)]
    t = GroupRingElement(C2, {0: 3, 1: 1})
    rep = lueck_trace(t, [0, 0, 1], [whole_group(C2)])
    assert rep.reference == 10 and rep.steps[0].exact == 10


@pytest.mark.parametrize("power", [1, 2, 3, 4])
def test_lueck_deviation_nonincreasing(power):
    s = z1({1: 1, -1: 1})
    Q = [0] * power + [1]
    rep = lueck_trace(s, Q, [box(1, n) for n in (2, 5, 10, 20, 50, 100)])
    devs = [st.error_bound for st in rep.steps]
    assert all(b <= a for a, b in zip(devs, devs[1:]))
    # float path agrees with the exact one
    flt = lueck_trace(s.to_float(), Q, [box(1, 20)])
    assert flt.steps[0].value == pytest.approx(float(lueck_trace(s, Q, [box(1, 20)]).steps[0].exact), abs=1e-12)


def test_lueck_matches_dense_matrix_power():
    f = GroupRingElement(HEIS, {(0, 0, 0): 2, (1, 0, 0): 1, (-1, 0, 0): 1, (0, 1, 1): -1, (0, -1, 0): -1})
    F = ball(HEIS, HEIS.standard_generators(), 3)
    Q = [1, -2, 0, 3]
    M = assemble(f, F).to_float()
    dense = np.trace(np.eye(len(F)) - 2 * M + 3 * M @ M @ M) / len(F)
    rep = lueck_trace(f, Q, [F])
    assert float(rep.steps[0].exact) == pytest.approx(dense, rel=1e-12)


# -- reports --------------------------------------------------------------------

def test_report_serialization():
    rep = EstimateReport("demo", [Step(1, 2, 0.1, 1e-3), Step(2, 4, 1 / 3, None, Fraction(1, 3))], 1e-3, ["a note"])
    d = json.loads(rep.to_json())
    assert d["final"] == 1 / 3 and d["steps"][1]["exact"] == "1/3"
    assert d["method"] == "demo" and d["notes"] == ["a note"]
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,set_size,value,error_bound"
    assert lines[2] == "2,4,0.33333333333333331,"
    assert float(lines[1].split(",")[2]) == 0.1
    with pytest.raises(ValueError):
        EstimateReport("empty", []).final
