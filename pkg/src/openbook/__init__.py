"""Milnor sets, asymptotic regularity conditions and open-book verdicts at infinity
for real polynomial maps and mixed polynomials."""
from .algebra import (Arc, MixedPolynomial, ParseError, RealPoly, RealPolyMap, arc_substitute, conj_product,
                      parse_mixed, parse_real, parse_real_map, realify, wirtinger)
from .asymptotics import (BoundednessVerdict, BoundStatus, Constraint, boundedness, estimate_S,
                          estimate_S_quotient, radius_sweep)
from .decision import ConditionReport, OpenBookVerdict, Options, Problem, assemble_conditions, check, verdict
from .milnor import (MilnorSystem, milnor_quotient_system, milnor_system, mixed_milnor_membership, nabla,
                     sample_points, sing_system, zero_system)
from .structure import (codim_at_infinity, detect_polar, detect_radial, face_polynomial, newton_polyhedron,
                        quotient_critical_on_torus)

__version__ = "0.1.0"
