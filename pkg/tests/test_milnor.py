from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from openbook.algebra import RealPoly, parse_real, parse_real_map, realify
from openbook.milnor import (NABLA_OMEGA_CONSTANT, SystemKind, determinant, milnor_quotient_system,
                             milnor_system, minors, mixed_milnor_membership, nabla, omega_matrix,
                             realify_field, sample_points, sing_system, zero_system)
from openbook.numeric import rank_drop

from conftest import EX_QUARTIC, EX_RADIAL, mixed
from test_algebra import mixed_polys


def same_up_to_scalar(p: RealPoly, q: RealPoly) -> bool:
    if set(p.terms) != set(q.terms):
        return False
    e = next(iter(p.terms))
    r = p.terms[e] / q.terms[e]
    return all(p.terms[k] == r * q.terms[k] for k in p.terms)


def test_real_map_milnor_generator(real_map_example):
    system = milnor_system(real_map_example)
    expected = parse_real("4*x*y^4 - 9*y^3 - 6*x^3*y^2 + 18*x^2*y - 12*x", ["x", "y", "z"])
    assert system.kind is SystemKind.MILNOR
    assert any(same_up_to_scalar(g, expected) for g in system.generators)


def test_quotient_of_linear_form():
    system = milnor_quotient_system(realify(mixed("z1")))
    expected = parse_real("-x1^2 - x2^2", ["x1", "x2"])
    assert len(system.generators) == 1
    assert same_up_to_scalar(system.generators[0], expected)
    assert system.excluded_locus is not None


def test_zero_system_lists_components():
    psi = realify(mixed("z1*z2"))
    assert zero_system(psi).generators == psi.components


def test_square_map_milnor_set_is_everything():
    psi = parse_real_map("x1^2; x2")
    assert milnor_system(psi).is_whole_space()


def test_sing_of_radial_example_is_z1_axis():
    sing = sing_system(realify(mixed(EX_RADIAL)))
    for g in sing.generators:
        assert g.eval([0, 0, Fraction(3), Fraction(-5, 7)]) == 0
    assert any(g.eval([1, 0, 1, 0]) != 0 for g in sing.generators)


def test_determinant_matches_numeric():
    rng = np.random.default_rng(1)
    mat = [[RealPoly.const(1, int(v)) for v in row] for row in rng.integers(-5, 6, size=(4, 4))]
    exact = determinant(mat).eval([0])
    numeric = np.linalg.det(np.array([[float(e.eval([0])) for e in row] for row in mat]))
    assert np.isclose(float(exact), numeric)


def test_minors_count_and_dedup():
    x = [RealPoly.var(3, j) for j in range(3)]
    rows = [x, x]  # repeated rows: every 2x2 minor vanishes
    assert minors(rows, 2) == []


@settings(max_examples=20, deadline=None)
@given(mixed_polys())
def test_nabla_is_minus_omega(f):
    psi = realify(f)
    om = omega_matrix(psi)
    lhs = realify_field(nabla(f))
    rhs = tuple(NABLA_OMEGA_CONSTANT * e for e in om.row(0, 1))
    assert lhs == rhs


def test_omega_antisymmetric():
    om = omega_matrix(parse_real_map("x1*x2; x1 + x3; x2^2"))
    assert om.row(1, 0) == tuple(-e for e in om.row(0, 1))
    with pytest.raises(ValueError):
        om.row(1, 1)


def _exact_rank_drop(system, point):
    return all(g.eval(point) == 0 for g in system.generators)


def test_rank_oracle_on_paraboloid():
    # x^2 + y^2 - z: Milnor set is the z-axis together with the plane z = -1/2
    psi = parse_real_map("vars: x,y,z\nx^2 + y^2 - z")
    system = milnor_system(psi)
    for pt in ([Fraction(1, 3), Fraction(2), Fraction(-1, 2)], [0, 0, Fraction(7)], [1, 2, 3]):
        J = np.array([[float(g.eval(pt)) for g in psi.components[0].gradient()], [float(v) for v in pt]])
        assert _exact_rank_drop(system, pt) == rank_drop(J)[0]


def test_mixed_membership_against_complex_parallelism():
    f = mixed("z1^2 + z2^2")
    # for holomorphic f, z is in M(f) iff conj(z) is complex-parallel to df(z)
    assert mixed_milnor_membership(f, [1, 0])[0]
    assert mixed_milnor_membership(f, [1, 1])[0]
    assert not mixed_milnor_membership(f, [1, 1j])[0]
    assert mixed_milnor_membership(f, [0, 0])[0]


def test_sample_points_on_quartic_example():
    sing = sing_system(realify(mixed(EX_QUARTIC)))
    pts = sample_points(sing, starts=48, seed=3)
    assert pts
    for x in pts:
        d = min(np.hypot(x[0], x[1]), np.linalg.norm(x - np.array([-2.0, 0, 0, 0])))
        assert d < 1e-6
