from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from openbook.algebra import MixedPolynomial, RealPoly, RealPolyMap, parse_real, parse_real_map, realify
from openbook.structure import (as_map, codim_at_infinity, detect_polar, detect_radial, euler_defect,
                                face_polynomial, newton_polyhedron, quotient_critical_on_torus,
                                realified_weights)

from conftest import EX_ABS2, EX_CIRCLE, EX_POLAR3, EX_RADIAL, mixed


def test_radial_certificate_of_cubic_example():
    cert = detect_radial(mixed(EX_RADIAL))
    assert cert.weights == (1, 1) and cert.degree == 3


def test_no_radial_certificate_for_mixed_degrees():
    assert detect_radial(parse_real("x + x^2*y", ["x", "y"])) is None


def test_weighted_radial_certificate():
    cert = detect_radial(parse_real("x^3 + y^2", ["x", "y"]))
    assert (cert.weights, cert.degree) == ((2, 3), 6)


def test_polar_certificates():
    c = detect_polar(mixed(EX_ABS2))
    assert c is not None and c.degree > 0
    c3 = detect_polar(mixed(EX_POLAR3))
    assert c3.weights[0] == 5 * c3.weights[2]
    assert c3.all_nonzero


def test_polar_weights_check_by_hand():
    f = mixed(EX_POLAR3)
    c = detect_polar(f)
    for nu, mu in f.terms:
        assert sum(p * (a - b) for p, a, b in zip(c.weights, nu, mu)) == c.degree


def test_polar_none_when_inconsistent():
    # z1 and z1^2 need p1 = k and 2 p1 = k at once
    assert detect_polar(mixed("z1 + z1^2")) is None


@st.composite
def weighted_homogeneous(draw):
    q = draw(st.tuples(st.integers(1, 3), st.integers(1, 3)))
    d = draw(st.integers(2, 9))
    exps = [(a, b) for a in range(10) for b in range(10) if q[0] * a + q[1] * b == d]
    assume(exps)
    chosen = draw(st.lists(st.sampled_from(exps), min_size=1, max_size=4, unique=True))
    coeffs = draw(st.lists(st.integers(-4, 4).filter(bool), min_size=len(chosen), max_size=len(chosen)))
    return RealPoly(2, dict(zip(chosen, coeffs)))


@settings(max_examples=30, deadline=None)
@given(weighted_homogeneous())
def test_euler_identity_for_detected_weights(p):
    cert = detect_radial(p)
    assert cert is not None
    assert all(c.is_zero() for c in euler_defect(as_map(p), cert))


def test_euler_identity_on_realified_mixed():
    f = mixed(EX_RADIAL)
    cert = realified_weights(detect_radial(f))
    assert all(c.is_zero() for c in euler_defect(realify(f), cert))


def test_newton_polyhedron_of_circle_example():
    P = newton_polyhedron(mixed(EX_CIRCLE))
    assert set(P.support) == {(1, 0), (1, 2), (2, 4)}
    face = P.face_with_points([(1, 2), (2, 4)])
    assert face.dimension == 1
    assert face_polynomial(mixed(EX_CIRCLE), face) == mixed("z1*z2*conj(z2) + z1^2*z2^4")
    j = P.to_json()
    assert j["support"] and j["faces"]


def test_face_polynomial_rejects_foreign_face():
    P = newton_polyhedron(mixed(EX_CIRCLE))
    Q = newton_polyhedron(mixed("z1 + z2"))
    with pytest.raises(ValueError):
        face_polynomial(mixed(EX_CIRCLE), Q.faces[0])


def test_torus_search_finds_real_valued_witness():
    # 2 Re(z1 conj(z2)) has constant argument, so every torus point off V is critical
    res = quotient_critical_on_torus(mixed("z1*conj(z2) + conj(z1)*z2"), starts=16, seed=0)
    assert res.status == "Witness"


def test_torus_search_empty_for_face_polynomial():
    res = quotient_critical_on_torus(mixed("z1*z2*conj(z2) + z1^2*z2^4"), starts=96, seed=0)
    assert res.status == "EmptyUpToSearch"


def test_codim_confirmed_and_violated():
    assert codim_at_infinity(parse_real_map("vars: x,y,z\nx^2+y^2-z^2")).codim == 1
    assert codim_at_infinity(mixed(EX_ABS2)).status == "Confirmed"
    # real-valued mixed polynomial: V is a real hypersurface, codimension 1 instead of 2
    r = codim_at_infinity(mixed("z1*conj(z2) + conj(z1)*z2"))
    assert r.status == "Violated" and r.codim == 1


def test_codim_of_bounded_V_is_unknown():
    r = codim_at_infinity(mixed("z1"))
    assert r.status == "Unknown" and r.samples == 0
