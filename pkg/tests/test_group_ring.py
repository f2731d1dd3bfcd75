from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C2, HEIS, S3, SPEC_IDS, SPECS, Z1, Z2, ring_elements, z1
from fkdet.group_ring import (
    CoeffKind,
    CoeffKindError,
    GroupRingElement,
    NotAContractionError,
    SpecMismatchError,
    build_l1_unit,
    convolve,
    format_element,
    l1_norm,
    l2_norm_sq,
    make_positive,
    parse_element,
    star,
    trace_e,
    trace_of_product,
)


def brute_convolve(f, g):
    """Double loop over supports, written independently of the library."""
    out = {}
    for x, a in f.items():
        for y, b in g.items():
            z = f.spec.mul(x, y)
            out[z] = out.get(z, 0) + a * b
    return {k: v for k, v in out.items() if v != 0}


# -- examples -----------------------------------------------------------------

def test_convolution_examples():
    s = z1({1: 1, -1: 1})
    assert s * s == z1({2: 1, 0: 2, -2: 1})
    f = z1({0: 5, 1: 1, -1: 1})
    assert f * GroupRingElement.one(Z1) == f
    t = GroupRingElement(C2, {0: 3, 1: 1})
    assert t * t == GroupRingElement(C2, {0: 10, 1: 6})


def test_star_examples():
    assert star(z1({0: 2, 1: 3})) == z1({0: 2, -1: 3})
    x = GroupRingElement.monomial(HEIS, (1, 0, 0))
    assert star(x) == GroupRingElement.monomial(HEIS, (-1, 0, 0))


def test_l1_and_trace_examples():
    f = z1({0: 5, 1: 1, -1: 1})
    s = z1({1: 1, -1: 1})
    assert l1_norm(f) == 7
    assert l1_norm(GroupRingElement.zero(Z1)) == 0
    assert l1_norm(s * s) == 4
    assert trace_e(f) == 5
    assert trace_e(z1({1: 1})) == 0
    assert trace_e(s * s) == 2


def test_build_l1_unit_examples():
    g = z1({1: Fraction(1, 5), -1: Fraction(1, 5)})
    unit = build_l1_unit(g, 5)
    assert unit.element == z1({0: 5, 1: 1, -1: 1})
    assert unit.element.kind is CoeffKind.EXACT_INT
    assert unit.is_l1_unit and unit.is_integral
    one = build_l1_unit(GroupRingElement.zero(Z1), 1)
    assert one.element == GroupRingElement.one(Z1)
    with pytest.raises(NotAContractionError):
        build_l1_unit(z1({1: Fraction(1, 2), -1: Fraction(1, 2)}), 2)


def test_make_positive_examples():
    assert make_positive(z1({0: 5, 1: 1})) == z1({0: 26, 1: 5, -1: 5})
    e = GroupRingElement.one(HEIS)
    assert make_positive(e) == e


def test_zero_coefficients_pruned():
    f = GroupRingElement(Z1, {(0,): 0, (1,): 2})
    assert f.support == frozenset({(1,)})
    assert (z1({1: 1}) - z1({1: 1})).support == frozenset()


def test_spec_and_kind_mismatch():
    with pytest.raises(SpecMismatchError):
        z1({0: 1}) * GroupRingElement.one(Z2)
    with pytest.raises(CoeffKindError):
        z1({0: 1}) + z1({0: 1.5})
    with pytest.raises(CoeffKindError):
        GroupRingElement(Z1, {(0,): Fraction(1, 2)}, CoeffKind.EXACT_INT)


# -- algebraic properties ------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=SPEC_IDS)
def test_ring_axioms(spec):
    el = ring_elements(spec)

    @settings(max_examples=200, deadline=None)
    @given(el, el, el)
    def check(f, g, h):
        assert (f * g).coeffs == brute_convolve(f, g)
        assert (f * g) * h == f * (g * h)
        assert f * (g + h) == f * g + f * h
        assert (f + g) * h == f * h + g * h
        assert f + g == g + f
        assert star(f * g) == star(g) * star(f)
        assert star(star(f)) == f
        assert star(f + g) == star(f) + star(g)

    check()


@pytest.mark.parametrize("spec", SPECS, ids=SPEC_IDS)
def test_trace_and_norm_properties(spec):
    el = ring_elements(spec, 5)

    @settings(max_examples=500, deadline=None)
    @given(el, el)
    def check(f, g):
        assert trace_e(f * g) == trace_e(g * f)
        assert trace_of_product(f, g) == trace_e(f * g)
        assert l1_norm(f * g) <= l1_norm(f) * l1_norm(g)
        assert l1_norm(star(f)) == l1_norm(f)
        p = make_positive(f)
        assert star(p) == p
        assert trace_e(p) == l2_norm_sq(f) == sum(a * a for _, a in f.items())

    check()


@given(ring_elements(Z2, 5, st.fractions(-3, 3, max_denominator=7)), ring_elements(Z2, 5, st.fractions(-3, 3, max_denominator=7)))
def test_rational_arithmetic_is_exact(f, g):
    assert (f * g).coeffs == brute_convolve(f, g)
    assert trace_e(f * g) == trace_e(g * f)


@settings(max_examples=100)
@given(ring_elements(HEIS, 5))
def test_star_involution_on_random_elements(f):
    assert star(star(f)) == f


def test_float_scalars_and_conversions():
    f = z1({0: 5, 1: 1, -1: 1})
    g = f.to_float()
    assert g.kind is CoeffKind.FLOAT
    assert (g - 5).coeffs == {(1,): 1.0, (-1,): 1.0}
    assert (f / 5).coeffs[(1,)] == Fraction(1, 5)
    assert (f / 5).to_float().kind is CoeffKind.FLOAT
    assert f**3 == f * f * f
    assert g.is_self_adjoint()


# -- text format ---------------------------------------------------------------

def test_text_format_example():
    f = parse_element("5\t(0)\n1\t(1)\n1\t(-1)\n", Z1)
    assert f == z1({0: 5, 1: 1, -1: 1})
    assert parse_element("1/5 (1)\n1/5 (-1)", Z1).coeffs[(1,)] == Fraction(1, 5)
    assert parse_element("3 (0)\n2 (0)", Z1) == z1({0: 5})


@pytest.mark.parametrize("spec", SPECS, ids=SPEC_IDS)
def test_text_round_trip(spec):
    @given(ring_elements(spec, 6))
    def check(f):
        back = parse_element(format_element(f), spec)
        assert back == f and back.kind is f.kind

    check()


@given(ring_elements(S3, 6, st.fractions(-5, 5, max_denominator=9)))
def test_text_round_trip_rational(f):
    back = parse_element(format_element(f), S3)
    assert back == f and back.kind is f.kind


def test_text_parse_errors_are_line_numbered():
    with pytest.raises(ValueError, match="line 2"):
        parse_element("1 (0)\noops\n", Z1)
    with pytest.raises(ValueError, match="line 1"):
        parse_element("x (0)\n", Z1)
    with pytest.raises(ValueError, match="line 1"):
        parse_element("1 (0,0)\n", Z1)


def test_convolve_is_the_operator():
    f = z1({0: 1, 1: 2})
    assert convolve(f, f) == f * f
