from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from openbook.algebra import (Arc, GaussianRational, MixedPolynomial, ParseError, RealPoly, arc_substitute,
                              conj_product, parse_mixed, parse_real, parse_real_map, realify, wirtinger)

from conftest import mixed


def test_parse_real_and_print_roundtrip():
    p = parse_real("4*x*y^4 - 9*y^3 + 1/2", ["x", "y"])
    assert p.terms == {(1, 4): 4, (0, 3): -9, (0, 0): Fraction(1, 2)}
    assert parse_real(p.to_str(["x", "y"]), ["x", "y"]) == p


def test_parse_real_map_header():
    psi = parse_real_map("vars: x,y,z\ny*(x-1); z")
    assert psi.names == ("x", "y", "z")
    assert psi.p == 2 and psi.m == 3


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_mixed("z1*(1+z2")
    assert err.value.pos == 8


def test_unknown_variable_is_an_error():
    with pytest.raises(ParseError):
        parse_real("x + w", ["x", "y"])


def test_realify_convention():
    # z1 = x1 + i x2, so z1^2 = x1^2 - x2^2 + 2 i x1 x2
    re_part, im_part = realify(parse_mixed("z1^2")).components
    assert re_part == parse_real("x1^2 - x2^2", ["x1", "x2"])
    assert im_part == parse_real("2*x1*x2", ["x1", "x2"])


def test_realify_of_abs_square_is_real():
    re_part, im_part = realify(parse_mixed("z1*conj(z1)")).components
    assert re_part == parse_real("x1^2 + x2^2", ["x1", "x2"])
    assert im_part.is_zero()


def test_wirtinger_derivatives():
    f = mixed("z1^2*conj(z1) + 3*z2*conj(z2)^2", 2)
    df, dbf = wirtinger(f)
    assert df[0] == mixed("2*z1*conj(z1)", 2)
    assert dbf[0] == mixed("z1^2", 2)
    assert df[1] == mixed("3*conj(z2)^2", 2)
    assert dbf[1] == mixed("6*z2*conj(z2)", 2)


def test_conj_product_needs_holomorphic_factors():
    g, h = mixed("z1*z2", 2), mixed("z1", 2)
    assert conj_product(g, h) == mixed("z1*conj(z1)*z2", 2)
    with pytest.raises(ValueError):
        conj_product(mixed("conj(z1)", 2), h)


def test_gaussian_coefficients():
    f = parse_mixed("(1+2*i)*z1")
    assert f.terms[((1,), (0,))] == GaussianRational(1, 2)
    re_part, im_part = realify(f).components
    assert re_part == parse_real("x1 - 2*x2", ["x1", "x2"])
    assert im_part == parse_real("2*x1 + x2", ["x1", "x2"])


def test_arc_substitute_hand_expansion():
    # x = t - 1, y = 2 t^-1: x*y = 2 - 2 t^-1 exactly
    arc = Arc((1, -1), ((1, -1, 0), (2, 0, 0)))
    lau = arc_substitute(parse_real("x*y", ["x", "y"]), arc)
    assert lau.top == 0
    assert lau.coefficient(0) == 2 and lau.coefficient(-1) == -2 and lau.coefficient(-2) == 0


def test_arc_substitute_detects_cancellation():
    # the hyperbola arc x = t, y = 1/t kills x*y - 1 to every order
    arc = Arc((1, -1), ((1, 0, 0, 0), (1, 0, 0, 0)))
    lau = arc_substitute(parse_real("x*y - 1", ["x", "y"]), arc)
    assert lau.leading_exponent is None


def test_arc_substitute_mixed_uses_conjugates():
    arc = Arc((1,), ((GaussianRational(0, 1), 0),), complex_ring=True)  # z = i t
    lau = arc_substitute(parse_mixed("z1*conj(z1)"), arc)
    assert lau.top == 2 and lau.coefficient(2) == 1


coeff = st.integers(-3, 3)
mono = st.tuples(st.integers(0, 2), st.integers(0, 2))


@st.composite
def mixed_polys(draw, n=2):
    terms = {}
    for _ in range(draw(st.integers(1, 4))):
        nu = draw(st.tuples(*[st.integers(0, 2)] * n))
        mu = draw(st.tuples(*[st.integers(0, 2)] * n))
        terms[(nu, mu)] = GaussianRational(draw(coeff), draw(coeff))
    return MixedPolynomial(n, terms)


@settings(max_examples=40, deadline=None)
@given(mixed_polys(), st.tuples(*[st.floats(-2, 2)] * 4))
def test_realify_agrees_with_complex_evaluation(f, x):
    z = [complex(x[0], x[1]), complex(x[2], x[3])]
    value = complex(f.eval(z))
    re_part, im_part = realify(f).components
    assert np.isclose(float(re_part.eval(list(x))), value.real, atol=1e-9)
    assert np.isclose(float(im_part.eval(list(x))), value.imag, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(mixed_polys(), mixed_polys())
def test_realify_is_multiplicative(f, g):
    rf, rg, rfg = realify(f).components, realify(g).components, realify(f * g).components
    assert rfg[0] == rf[0] * rg[0] - rf[1] * rg[1]
    assert rfg[1] == rf[0] * rg[1] + rf[1] * rg[0]


@settings(max_examples=30, deadline=None)
@given(mixed_polys())
def test_print_parse_roundtrip(f):
    assert parse_mixed(f.to_str(), ["z1", "z2"]) == f
