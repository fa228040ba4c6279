"""The eleven acceptance criteria, one test each, at the stated tolerances."""
import contextlib
from fractions import Fraction

import numpy as np
import pytest

from openbook.algebra import GaussianRational, MixedPolynomial, RealPoly, arc_substitute, parse_real, parse_real_map, realify
from openbook.asymptotics import BoundStatus, Constraint, boundedness, estimate_S, radius_sweep
from openbook.decision import Options, Problem, Status, check
from openbook.milnor import (NABLA_OMEGA_CONSTANT, milnor_quotient_system, milnor_system, nabla, omega_matrix,
                             realify_field, sample_points, sing_system)
from openbook.numeric import PolySystem, gauss_newton, newton_distance, rank_drop
from openbook.structure import (as_map, detect_polar, detect_radial, euler_defect, face_polynomial,
                                newton_polyhedron, quotient_critical_on_torus, realified_weights)

import conftest
from conftest import (EX_ABS2, EX_BROUGHTON_MIXED, EX_CIRCLE, EX_POLAR3, EX_QUARTIC, EX_RADIAL, EX_REAL_MAP,
                      mixed)


@contextlib.contextmanager
def criterion(n, title):
    try:
        yield
    except BaseException:
        conftest.ACCEPTANCE_LINES.append(f"ACCEPTANCE {n}: FAIL {title}")
        raise
    conftest.ACCEPTANCE_LINES.append(f"ACCEPTANCE {n}: PASS {title}")


def same_up_to_scalar(p, q):
    if set(p.terms) != set(q.terms):
        return False
    e = next(iter(p.terms))
    r = p.terms[e] / q.terms[e]
    return r != 0 and all(p.terms[k] == r * q.terms[k] for k in p.terms)


def real_map():
    return parse_real_map(EX_REAL_MAP)


def test_1_milnor_generator_exact():
    with criterion(1, "Milnor generator of the cubic real map matches exactly"):
        expected = parse_real("4*x*y^4 - 9*y^3 - 6*x^3*y^2 + 18*x^2*y - 12*x", ["x", "y", "z"])
        gens = milnor_system(real_map()).generators
        assert any(same_up_to_scalar(g, expected) for g in gens)


def test_2_singular_locus_reproduction():
    with criterion(2, "every sampled singular point lies within 1e-6 of {x=0} or (-2,0)"):
        sing = sing_system(realify(mixed(EX_QUARTIC)))
        pts = sample_points(sing, starts=256, seed=0)
        assert pts
        for x in pts:
            d = min(np.hypot(x[0], x[1]), np.linalg.norm(x - np.array([-2.0, 0, 0, 0])))
            assert d < 1e-6, x
        # both pieces are actually reached
        assert any(np.linalg.norm(x - np.array([-2.0, 0, 0, 0])) < 1e-6 for x in pts)
        assert any(np.hypot(x[0], x[1]) < 1e-6 for x in pts)


def test_3_homogeneity_certificates():
    with criterion(3, "radial and polar certificates"):
        c = detect_radial(mixed(EX_RADIAL))
        assert (c.weights, c.degree) == ((1, 1), 3)
        assert detect_polar(mixed(EX_ABS2)).degree > 0
        p3 = detect_polar(mixed(EX_POLAR3))
        assert p3.weights[0] == 5 * p3.weights[2]
        assert detect_radial(parse_real("x + x^2*y", ["x", "y"])) is None


def test_4_euler_identity():
    inputs = [mixed(EX_RADIAL), mixed(EX_ABS2), mixed(EX_QUARTIC), mixed("z1^2*conj(z2) + z2^3"),
              parse_real("x^3 + y^2", ["x", "y"]), parse_real_map("vars: x,y,z\nx^2*y - z^3; x*y*z"),
              real_map(), parse_real("x + x^2*y", ["x", "y"])]
    with criterion(4, "Euler identity is exactly zero wherever a radial certificate exists"):
        hits = 0
        for f in inputs:
            cert = detect_radial(f)
            if cert is None:
                continue
            hits += 1
            if isinstance(f, MixedPolynomial):
                psi, cert = realify(f), realified_weights(cert)
            else:
                psi = as_map(f)
            assert all(c.is_zero() for c in euler_defect(psi, cert))
        assert hits >= 5


def test_5_witness_arcs():
    with criterion(5, "unbounded verdicts with a (1,-1,.) arc, root c in {1,2}, exact re-check"):
        psi = real_map()
        for system, constraint in ((milnor_system(psi), Constraint.NONE),
                                   (milnor_quotient_system(psi), Constraint.EXCLUDE_V)):
            v = boundedness(system, constraint, psi=psi)
            assert v.status is BoundStatus.UNBOUNDED
            arcs = [a for a in [v.witness] + v.alternatives if a.lead[:2] == (1, -1)]
            assert arcs
            found = False
            for arc in arcs:
                c = arc.coeffs[0][0] * arc.coeffs[1][0]
                root = Fraction(c).limit_denominator(1000)
                if abs(float(root) - c) > 1e-12 or root not in (1, 2):
                    continue
                assert -6 * root ** 2 + 18 * root - 12 == 0
                # independent substitution: the weighted-top part must cancel
                for g in system.generators:
                    lau = arc_substitute(g, arc)
                    top = max(sum(e * w for e, w in zip(exp, arc.lead)) for exp in g.terms)
                    assert all(abs(float(lau.coefficient(e))) < 1e-9
                               for e in range(top, lau.top + 1) if e >= lau.valid_down_to)
                found = True
            assert found


def test_6_circle_of_values():
    with criterion(6, "at least 8 limits of modulus 0.25 within 1e-3"):
        S = estimate_S(mixed(EX_CIRCLE))
        mods = [float(np.hypot(*s.value)) for s in S.limits]
        assert len(mods) >= 8
        assert all(abs(m - 0.25) <= 1e-3 for m in mods)


def test_7_semi_tame_detection():
    with criterion(7, "all limits within 1e-6 of 0"):
        S = estimate_S(mixed(EX_BROUGHTON_MIXED))
        assert S.limits
        assert all(np.linalg.norm(s.value) <= 1e-6 for s in S.limits)


def test_8_face_machinery():
    with criterion(8, "face polynomial exact and torus search empty with 512 starts"):
        f = mixed(EX_CIRCLE)
        P = newton_polyhedron(f)
        face = P.face_with_points([(1, 2), (2, 4)])
        f_face = face_polynomial(f, face)
        assert f_face == mixed("z1*z2*conj(z2) + z1^2*z2^4")
        res = quotient_critical_on_torus(f_face, starts=512, seed=0)
        assert res.status == "EmptyUpToSearch"


def _proved(v):
    return v.status in (Status.PROVED, Status.PROVED_QUALIFIED)


def _cites_equivalence(v):
    return any(c["rule"] == "equivalence" or "equivalence" in c.get("based_on", ()) for c in v.chain)


VERDICT_TABLE = [
    ("radial cubic", EX_RADIAL, lambda v: _proved(v) and v.binding == "singular"),
    ("real map", None, lambda v: v.status is Status.REFUTED),
    ("quartic", EX_QUARTIC, _proved),
    ("mixed Broughton", EX_BROUGHTON_MIXED, lambda v: _proved(v) and v.binding == "smooth"
     and "smooth-binding" in v.rules),
    ("abs square", EX_ABS2, lambda v: _proved(v) and "polar-homogeneous" in v.rules),
    ("polar three", EX_POLAR3, lambda v: _proved(v) and "polar-homogeneous" in v.rules),
    ("circle values", EX_CIRCLE, lambda v: v.report.cond_ii.value is True and v.report.cond_ii.qualified
     and v.report.semi_tame.value is False and _cites_equivalence(v)),
]


@pytest.mark.slow
def test_9_verdict_table():
    with criterion(9, "verdict regression table"):
        bad = []
        for name, text, ok in VERDICT_TABLE:
            f = real_map() if text is None else mixed(text)
            faces = (((1, 2), (2, 4)),) if text == EX_CIRCLE else ()
            v = check(Problem(f), Options(seed=0, faces=faces))
            again = check(Problem(f), Options(seed=0, faces=faces)) if name == "real map" else v
            if not ok(v) or again.to_json() != v.to_json():
                bad.append((name, v.status.value, v.rules))
        assert not bad, bad


def _random_mixed(rng, n, degree):
    terms = {}
    for _ in range(rng.integers(1, 5)):
        while True:
            nu = tuple(int(v) for v in rng.integers(0, degree + 1, n))
            mu = tuple(int(v) for v in rng.integers(0, degree + 1, n))
            if sum(nu) + sum(mu) <= degree:
                break
        terms[(nu, mu)] = GaussianRational(Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))),
                                           Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))
    return MixedPolynomial(n, terms)


def _bridge_holds(f):
    lhs = realify_field(nabla(f))
    rhs = tuple(NABLA_OMEGA_CONSTANT * e for e in omega_matrix(realify(f)).row(0, 1))
    return lhs == rhs


def _quotient_points(psi, starts, seed):
    """Zeros of the quotient system on random levels |Psi|^2 = s, hence off V."""
    gens = list(milnor_quotient_system(psi).generators)
    norm2 = sum((c * c for c in psi.components[1:]), psi.components[0] * psi.components[0])
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(starts):
        level = Fraction(int(rng.integers(1, 9)), 4)
        q = PolySystem(gens + [norm2 - RealPoly.const(psi.m, level)])
        x = gauss_newton(q, q.refine(rng.normal(scale=2.0, size=psi.m), max_nfev=200), None, 1e-12)
        if np.all(np.isfinite(x)) and newton_distance(q, x) <= 1e-10 and np.linalg.norm(x) < 1e3:
            out.append(x)
    return out


def _on_milnor(psi, x):
    if np.linalg.norm(x) < 1e-12:
        return True  # the origin belongs to M(Psi) by convention
    J = np.array([[float(c) for c in row] for row in PolySystem(list(psi.components)).jacobian(x)])
    return rank_drop(np.vstack([J, x]), 1e-6)[0]


def _rational_points(rng, count, on):
    for _ in range(count):
        yield [Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 9))) for _ in range(3)], on


@pytest.mark.slow
def test_10_property_suites():
    with criterion(10, "bridge identity, quotient containment, SVD rank oracle"):
        rng = np.random.default_rng(0)
        # bridge: 20 random mixed polynomials with n <= 3 and degree <= 4
        for k in range(20):
            f = _random_mixed(rng, 1 + k % 3, 4)
            assert _bridge_holds(f)

        # containment of the angular Milnor set in M(Psi) minus V
        maps = [parse_real_map(t) for t in ("vars: x,y,z\nx^2 - y*z + 1; x*y + z^2",
                                            "vars: x,y,z\nx*y - z; x + z^2",
                                            "vars: x,y,z,w\nx*y - z*w + 1; x^2 + y - w")]
        pts = [(psi, x) for i, psi in enumerate(maps) for x in _quotient_points(psi, 400, seed=i)]
        assert len(pts) >= 1000
        for psi, x in pts[:1000]:
            assert np.linalg.norm(PolySystem(list(psi.components)).values(x)[0]) > 0.1
            assert _on_milnor(psi, x)

        # SVD rank oracle against exact minor vanishing at rational points
        checks, members = 0, 0
        cases = [
            (parse_real_map("vars: x,y,z\nx^2 + y^2 - z"),
             lambda r: [r[0], r[1], Fraction(-1, 2)] if r[2] > 0 else [0, 0, r[2]]),
            (parse_real_map("vars: x,y,z\nx; y"), lambda r: [r[0], r[1], 0]),
            (parse_real_map("vars: x,y,z\nx*y - z; x + z^2"), None),
        ]
        for psi, onto in cases:
            system = milnor_system(psi)
            ps = PolySystem(list(psi.components))
            for j, (r, _) in enumerate(_rational_points(rng, 334, True)):
                pt = onto(r) if (onto is not None and j % 2) else r
                exact = all(g.eval(pt) == 0 for g in system.generators)
                x = np.array([float(v) for v in pt])
                numeric = rank_drop(np.vstack([ps.jacobian(x), x]), 1e-8)[0]
                assert exact == numeric, (psi, pt)
                checks += 1
                members += exact
        assert checks >= 1000 and 100 <= members <= checks - 100


@pytest.mark.slow
def test_11_sweep_corroboration():
    with criterion(11, "sweep: none on the quartic, at least one per radius on the real map"):
        radii = (10.0, 100.0, 1000.0)
        quartic = radius_sweep(mixed(EX_QUARTIC), radii=radii, starts=128, seed=0)
        assert [r.count for r in quartic.rows] == [0, 0, 0]
        cubic = radius_sweep(real_map(), radii=radii, starts=128, seed=0)
        assert all(r.count >= 1 for r in cubic.rows)
