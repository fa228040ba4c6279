"""Curve selection at infinity.

Unbounded branches of a semi-algebraic set are searched as integer-exponent
arcs ``x_j(t) = sum_k a_{j,k} t^(w_j - k)`` with t -> infinity.  A weight
vector w selects leading forms; their common nonzero roots are extended order
by order through linear solves and then re-checked by exact substitution.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Dict, List, Sequence, Tuple

import numpy as np
import sympy
from scipy.optimize import least_squares

from .algebra import Arc, MixedPolynomial, RealPoly, RealPolyMap, arc_substitute, realify
from .milnor import MilnorSystem, SystemKind, milnor_quotient_system, milnor_system
from .numeric import PolySystem, cluster_points
from .structure import as_map, scaled_polys

DEFAULT_WMAX = 4
DEFAULT_ORDER = 6
DEFAULT_STARTS = 128
SOLUTIONS_PER_DIRECTION = 8
LEAD_TOL = 1e-10
ORDER_TOL = 1e-8


class BoundStatus(str, enum.Enum):
    BOUNDED_CERT = "BOUNDED_CERT"
    BOUNDED_SEARCH = "BOUNDED_SEARCH"
    UNBOUNDED = "UNBOUNDED"
    EMPTY = "EMPTY"
    UNKNOWN = "UNKNOWN"


class Constraint(str, enum.Enum):
    NONE = "none"
    INTERSECT_V = "intersect_V"
    EXCLUDE_V = "exclude_V"


@dataclass(frozen=True)
class Certificate:
    """A rule-based boundedness argument whose hypotheses were checked in this run."""

    name: str
    statement: str
    hypotheses: Tuple[str, ...]
    verified: bool = True

    def to_json(self):
        return {"name": self.name, "statement": self.statement,
                "hypotheses": list(self.hypotheses), "verified": self.verified}


@dataclass
class BoundednessVerdict:
    status: BoundStatus
    evidence: str
    system: MilnorSystem | None
    constraint: Constraint = Constraint.NONE
    witness: Arc | None = None
    wmax: int | None = None
    order: int | None = None
    certificate: Certificate | None = None
    stats: dict = field(default_factory=dict)
    alternatives: List[Arc] = field(default_factory=list)

    @property
    def bounded(self) -> bool | None:
        if self.status in (BoundStatus.BOUNDED_CERT, BoundStatus.BOUNDED_SEARCH, BoundStatus.EMPTY):
            return True
        if self.status is BoundStatus.UNBOUNDED:
            return False
        return None

    @property
    def qualified(self) -> bool:
        return self.status is BoundStatus.BOUNDED_SEARCH

    def to_json(self, include_system: bool = False):
        out = {
            "status": self.status.value,
            "evidence": self.evidence,
            "constraint": self.constraint.value,
            "witness": None if self.witness is None else self.witness.to_json(),
            "search_bounds": None if self.wmax is None else {"wmax": self.wmax, "order": self.order},
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "stats": self.stats,
            "other_witnesses": [a.to_json() for a in self.alternatives],
        }
        if include_system and self.system is not None:
            out["system"] = self.system.to_json()
        return out


# ---------------------------------------------------------------------------
# Equations and leading forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Equation:
    """A polynomial that must cancel along the arc.

    ``floor`` None: the top K+1 coefficients must vanish (a defining equation).
    ``floor`` f: every coefficient of an exponent >= f must vanish (a growth bound).
    """

    poly: RealPoly
    floor: int | None = None


class _Terms:
    def __init__(self, poly: RealPoly):
        keys = list(poly.terms)
        self.poly = poly
        self.exps = np.array(keys, dtype=np.int64).reshape(len(keys), poly.m)
        self.coeffs = np.array([float(poly.terms[k]) for k in keys])
        self.keys = keys

    def restrict(self, inactive: np.ndarray) -> np.ndarray:
        if not len(self.keys):
            return np.zeros(0, dtype=bool)
        return self.exps[:, inactive].sum(axis=1) == 0 if inactive.any() else np.ones(len(self.keys), bool)


@dataclass(frozen=True)
class LeadingSystem:
    weights: Tuple[int, ...]          # per real coordinate (0 for inactive ones)
    active: Tuple[bool, ...]          # per real coordinate
    group_weights: Tuple[int | None, ...]
    forms: Tuple[RealPoly, ...]       # initial forms that must vanish at the leading coefficients
    tops: Tuple[int | None, ...]      # top weighted degree per equation (None: identically zero)
    free: Tuple[int, ...]             # active coordinates absent from every form

    def to_json(self):
        return {"weights": list(self.weights), "active": list(self.active),
                "forms": [str(f.to_str(default_names_for(f.m))) for f in self.forms]}


def default_names_for(m: int):
    return tuple(f"x{j + 1}" for j in range(m))


def _definite(form: RealPoly) -> bool:
    """All exponents even and all coefficients of one sign: no real root on the torus."""
    signs = {c > 0 for c in form.terms.values()}
    return len(signs) == 1 and all(e % 2 == 0 for k in form.terms for e in k)


def _initial_form(t: _Terms, mask: np.ndarray, w: np.ndarray, m: int):
    if not mask.any():
        return None, None
    deg = t.exps[mask] @ w
    top = int(deg.max())
    idx = np.nonzero(mask)[0][deg == top]
    return RealPoly(m, {t.keys[i]: t.poly.terms[t.keys[i]] for i in idx}), top


def _enumerate(equations: Sequence[Equation], m: int, groups: Sequence[Tuple[int, ...]], wmax: int):
    terms = [_Terms(e.poly) for e in equations]
    seen = set()
    out = []
    ng = len(groups)
    for pattern in product((True, False), repeat=ng):
        if not any(pattern):
            continue
        act_groups = [g for g, on in zip(range(ng), pattern) if on]
        inactive = np.zeros(m, dtype=bool)
        for g, on in enumerate(pattern):
            if not on:
                inactive[list(groups[g])] = True
        masks = [t.restrict(inactive) for t in terms]
        for wa in sorted(product(range(-wmax, wmax + 1), repeat=len(act_groups)),
                         key=lambda v: (sum(abs(x) for x in v), v)):
            if max(wa) <= 0:
                continue
            g_ = 0
            for v in wa:
                g_ = gcd(g_, abs(v))
            if g_ != 1:
                continue
            gw = [None] * ng
            for g, v in zip(act_groups, wa):
                gw[g] = v
            w = np.zeros(m, dtype=np.int64)
            for g, v in zip(act_groups, wa):
                w[list(groups[g])] = v
            forms, tops, ok = [], [], True
            for eq, t, mask in zip(equations, terms, masks):
                form, top = _initial_form(t, mask, w, m)
                tops.append(top)
                if form is None:
                    continue
                if eq.floor is not None and top < eq.floor:
                    continue
                if len(form.terms) < 2 or _definite(form):
                    ok = False
                    break
                forms.append(form)
            if not ok:
                continue
            key = (pattern, tuple(sorted((tuple(sorted(f.terms.items())) for f in forms))))
            if key in seen:
                continue
            seen.add(key)
            used = set()
            for f in forms:
                for k in f.terms:
                    used.update(j for j, e in enumerate(k) if e)
            active = tuple(not b for b in inactive)
            free = tuple(j for j in range(m) if active[j] and j not in used)
            out.append(LeadingSystem(tuple(int(v) for v in w), active, tuple(gw), tuple(forms),
                                     tuple(tops), free))
    # simplest directions first: small weights, then lexicographic
    out.sort(key=lambda ls: (sum(abs(v) for v in ls.group_weights if v is not None),
                             sum(v is None for v in ls.group_weights),
                             tuple(-99 if v is None else v for v in ls.group_weights)))
    return out


def leading_systems(system: MilnorSystem, wmax: int = DEFAULT_WMAX, groups=None) -> List[LeadingSystem]:
    """Weight vectors (gcd-reduced, some positive entry, sup-norm <= wmax) with viable leading forms.

    A direction is viable when every nonvanishing generator has a leading form
    that is neither a monomial nor a definite sum of even powers, so that a
    common root with all active coordinates nonzero is not excluded outright.
    """
    groups = groups or [(j,) for j in range(system.m)]
    eqs = [Equation(g) for g in system.generators]
    return _enumerate(eqs, system.m, groups, wmax)


# ---------------------------------------------------------------------------
# Solving the leading system
# ---------------------------------------------------------------------------


@dataclass
class LeadingSolution:
    point: np.ndarray
    exact: Dict[int, object] | None = None


def _pivot(ls: LeadingSystem, groups) -> Tuple[int, ...] | None:
    for g in groups:
        j = g[0]
        if ls.active[j] and ls.weights[j] != 0 and not set(g) <= set(ls.free):
            return g
    for g in groups:
        if ls.active[g[0]] and ls.weights[g[0]] != 0:
            return g
    return None


def _exact_route(ls: LeadingSystem, groups, m: int) -> List[LeadingSolution] | None:
    """Exact root isolation when at most two real unknowns remain; None if not applicable."""
    if any(len(g) != 1 for g in groups):
        return None
    piv = _pivot(ls, groups)
    fixed_base = {j: 1 for j in ls.free}
    unknowns = [j for j in range(m) if ls.active[j] and j not in ls.free and (piv is None or j != piv[0])]
    if len(unknowns) > 2:
        return None
    syms = sympy.symbols(f"a0:{m}")
    exprs = []
    for f in ls.forms:
        e = sum(sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*[syms[j] ** k for j, k in enumerate(key)])
                for key, c in f.terms.items())
        exprs.append(e)
    out = []
    pivot_values = [1, -1] if piv is not None and piv[0] not in ls.free else [None]
    for pv in pivot_values:
        fixed = dict(fixed_base)
        if pv is not None:
            fixed[piv[0]] = pv
        subs = {syms[j]: v for j, v in fixed.items()}
        eq = [sympy.expand(e.subs(subs)) for e in exprs]
        eq = [e for e in eq if e != 0]
        u = [syms[j] for j in unknowns]
        sols: List[Dict[int, object]] = []
        if not u:
            if not eq:
                sols.append({})
        elif len(u) == 1:
            if not eq:
                return None  # a free family, handled numerically
            g = sympy.Poly(eq[0], u[0])
            for e in eq[1:]:
                g = sympy.gcd(g, sympy.Poly(e, u[0]))
            if g.degree() <= 0:
                continue
            for r in sympy.real_roots(g):
                if r != 0:
                    sols.append({unknowns[0]: r})
        else:
            if len(eq) < 2:
                return None
            x, y = u
            res = None
            for i in range(len(eq)):
                for k in range(i + 1, len(eq)):
                    r = sympy.resultant(eq[i], eq[k], y)
                    if r == 0:
                        continue
                    rp = sympy.Poly(r, x)
                    res = rp if res is None else sympy.gcd(res, rp)
            if res is None or res.is_zero:
                return None
            if res.degree() <= 0:
                continue
            for rx in sympy.real_roots(res):
                if rx == 0:
                    continue
                ys = None
                for e in eq:
                    py = sympy.Poly(e.subs(x, rx), y)
                    if py.is_zero:
                        continue
                    ys = py if ys is None else sympy.gcd(ys, py)
                if ys is None:
                    return None
                for ry in _real_roots_numeric(ys):
                    if abs(ry) > 1e-12 and all(abs(complex(sympy.N(e.subs({x: rx, y: ry}), 30))) < 1e-9 for e in eq):
                        sols.append({unknowns[0]: rx, unknowns[1]: ry})
        for s in sols:
            pt = np.zeros(m)
            exact = dict(fixed)
            exact.update(s)
            for j, v in exact.items():
                pt[j] = float(sympy.N(v, 30))
            out.append(LeadingSolution(pt, exact))
    return out


def _real_roots_numeric(poly: sympy.Poly) -> List[float]:
    coeffs = [complex(sympy.N(c, 30)) for c in poly.all_coeffs()]
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs)
    return [float(r.real) for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]


def _numeric_route(ls: LeadingSystem, groups, m: int, rng, starts: int, keep: int) -> List[LeadingSolution]:
    """Multistart in logarithmic coordinates, so that every active coordinate stays nonzero."""
    x_base = np.zeros(m)
    if not ls.forms:
        for j in range(m):
            if ls.active[j]:
                x_base[j] = 1.0
        return [LeadingSolution(x_base)]
    system = PolySystem(list(ls.forms))
    piv = _pivot(ls, groups)
    free_groups, var_groups = [], []
    for g in groups:
        if not ls.active[g[0]]:
            continue
        (free_groups if set(g) <= set(ls.free) else var_groups).append(g)
    for g in free_groups:
        x_base[g[0]] = 1.0
    pivot_fixed = piv is not None and piv in var_groups

    def unpack(params, signs):
        x = x_base.copy()
        D = np.zeros((m, len(params)))
        pos = 0
        for g, sgn in zip(var_groups, signs):
            r = 0.0 if (pivot_fixed and g == piv) else params[pos]
            radius = np.exp(r)
            if len(g) == 1:
                x[g[0]] = sgn * radius
                if not (pivot_fixed and g == piv):
                    D[g[0], pos] = x[g[0]]
                    pos += 1
            else:
                theta = params[pos + (0 if (pivot_fixed and g == piv) else 1)]
                x[g[0]], x[g[1]] = radius * np.cos(theta), radius * np.sin(theta)
                if not (pivot_fixed and g == piv):
                    D[g[0], pos], D[g[1], pos] = x[g[0]], x[g[1]]
                    pos += 1
                D[g[0], pos], D[g[1], pos] = -x[g[1]], x[g[0]]
                pos += 1
        return x, D

    nparams = sum(len(g) for g in var_groups) - (1 if pivot_fixed else 0)
    found = []
    for _ in range(starts):
        signs = rng.choice([-1.0, 1.0], size=len(var_groups))
        p0 = []
        for g in var_groups:
            if not (pivot_fixed and g == piv):
                p0.append(rng.normal())
            if len(g) == 2:
                p0.append(rng.uniform(-np.pi, np.pi))
        p0 = np.array(p0)

        # residuals relative to the term magnitudes, so coordinate hyperplanes do not attract
        def fun(p):
            x, _ = unpack(p, signs)
            v, mag = system.point_eval(x)
            return v / np.maximum(mag, 1e-300)

        def jac(p):
            x, D = unpack(p, signs)
            _, mag = system.point_eval(x)
            return (system.jacobian(x) / np.maximum(mag, 1e-300)[:, None]) @ D

        if nparams == 0:
            x, _ = unpack(np.zeros(0), signs)
        else:
            try:
                sol = least_squares(fun, p0, jac=jac, method="lm" if len(system) >= nparams else "trf",
                                    xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
            except (ValueError, np.linalg.LinAlgError):
                continue
            if not np.all(np.isfinite(sol.x)):
                continue
            # log-radii drifting away mean a coordinate is escaping to 0 or infinity
            if np.any(np.abs(_radii(sol.x, var_groups, piv, pivot_fixed)) > 9.0):
                continue
            x, _ = unpack(sol.x, signs)
        vals, mags = system.point_eval(x)
        if np.any(np.abs(vals) > LEAD_TOL * np.maximum(mags, 1e-300)):
            continue
        if not any(np.linalg.norm(x - y.point) < 1e-6 for y in found):
            found.append(LeadingSolution(x))
            if len(found) >= keep:
                break
    return found


def _radii(params, var_groups, piv, pivot_fixed):
    out, pos = [], 0
    for g in var_groups:
        if not (pivot_fixed and g == piv):
            out.append(params[pos])
            pos += 1
        if len(g) == 2:
            pos += 1
    return np.array(out)


def solve_leading(ls: LeadingSystem, groups, m: int, rng, starts: int = 32,
                  keep: int = SOLUTIONS_PER_DIRECTION) -> List[LeadingSolution]:
    exact = _exact_route(ls, groups, m)
    if exact is not None:
        return exact[:keep]
    return _numeric_route(ls, groups, m, rng, starts, keep)


# ---------------------------------------------------------------------------
# Series arithmetic for arc extension (float, vectorized)
# ---------------------------------------------------------------------------


def _batch_mul(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    out = np.zeros_like(a)
    for k in range(K + 1):
        out[:, k] = np.sum(a[:, :k + 1] * b[:, k::-1], axis=1)
    return out


class _Expander:
    """Expansion of one polynomial along arcs with fixed lead exponents."""

    def __init__(self, poly: RealPoly, w: np.ndarray, active: np.ndarray):
        t = _Terms(poly)
        mask = t.restrict(~active) if len(t.keys) else np.zeros(0, bool)
        self.exps = t.exps[mask]
        self.coeffs = t.coeffs[mask]
        self.empty = not len(self.coeffs)
        if not self.empty:
            deg = self.exps @ w
            self.top = int(deg.max())
            self.offsets = self.top - deg
        else:
            self.top = None

    def expand(self, A: np.ndarray, K: int, absolute: bool = False) -> np.ndarray:
        """Coefficients of t^top, ..., t^(top-K)."""
        out = np.zeros(K + 1)
        if self.empty:
            return out
        keep = self.offsets <= K
        exps, coeffs, offs = self.exps[keep], self.coeffs[keep], self.offsets[keep]
        A = np.abs(A) if absolute else A
        coeffs = np.abs(coeffs) if absolute else coeffs
        series = np.zeros((len(coeffs), K + 1))
        series[:, 0] = 1.0
        for j in range(exps.shape[1]):
            e = exps[:, j]
            if not e.any():
                continue
            powers = [np.eye(1, K + 1)[0]]
            for _ in range(int(e.max())):
                powers.append(_batch_mul(powers[-1][None, :], A[j, :K + 1][None, :], K)[0])
            series = _batch_mul(series, np.array(powers)[e], K)
        for c, o, s in zip(coeffs, offs, series):
            out[o:] += c * s[:K + 1 - o]
        return out


@dataclass
class ExtendedArc:
    arc: Arc
    coefficients: np.ndarray
    weights: Tuple[int, ...]
    order: int
    psi_expansion: List[Tuple[int | None, np.ndarray, np.ndarray]]


def extend_arc(equations: Sequence[Equation], ls: LeadingSystem, a0: np.ndarray, K: int,
               psi: Sequence[RealPoly] = ()) -> Tuple[ExtendedArc | None, int | None]:
    """Extend the leading coefficients order by order; returns (arc, None) or (None, failing order)."""
    m = len(a0)
    w = np.array(ls.weights, dtype=np.int64)
    active = np.array(ls.active)
    exps = [(_Expander(e.poly, w, active), e.floor) for e in equations]
    need = K
    for ex, fl in exps:
        if fl is not None and ex.top is not None and ex.top >= fl:
            need = max(need, ex.top - fl)
    psi_ex = [_Expander(p, w, active) for p in psi]
    for ex in psi_ex:
        if ex.top is not None:
            need = max(need, ex.top)
    A = np.zeros((m, need + 1))
    A[:, 0] = a0
    idx = np.nonzero(active)[0]
    forms_grad = []
    for ex, fl in exps:
        if ex.empty or (fl is not None and ex.top < fl):
            forms_grad.append(None)
            continue
        lead = RealPoly(m, {tuple(int(v) for v in e): Fraction(c) for e, c, o in zip(ex.exps, ex.coeffs, ex.offsets) if o == 0})
        forms_grad.append([lead.diff(j) for j in idx])

    def wanted(ex, fl, k):
        if ex.empty:
            return False
        if fl is None:
            return True
        return ex.top - k >= fl

    for k in range(1, need + 1):
        rows, rhs = [], []
        for (ex, fl), grads in zip(exps, forms_grad):
            if grads is None or not wanted(ex, fl, k):
                continue
            c = ex.expand(A, k)[k]
            rows.append([float(g.eval(list(a0))) for g in grads])
            rhs.append(-c)
        if rows:
            J = np.array(rows)
            delta, *_ = np.linalg.lstsq(J, np.array(rhs), rcond=1e-12)
            A[idx, k] = delta
        for (ex, fl), grads in zip(exps, forms_grad):
            if grads is None or not wanted(ex, fl, k):
                continue
            c = ex.expand(A, k)[k]
            mag = ex.expand(A, k, absolute=True)[k]
            if abs(c) > ORDER_TOL * max(mag, 1e-300) and abs(c) > 1e-13:
                return None, k
    coeffs = tuple(tuple(float(v) for v in A[j]) if active[j] else None for j in range(m))
    arc = Arc(tuple(int(v) for v in w), coeffs)
    psi_exp = []
    for ex in psi_ex:
        if ex.empty:
            psi_exp.append((None, np.zeros(1), np.zeros(1)))
        else:
            psi_exp.append((ex.top, ex.expand(A, need), ex.expand(A, need, absolute=True)))
    return ExtendedArc(arc, A, tuple(int(v) for v in w), need, psi_exp), None


def verify_arc(equations: Sequence[Equation], arc: Arc, order: int) -> bool:
    """Independent re-check through exact-arithmetic substitution of the stored arc."""
    m = arc.n
    active = np.array([c is not None for c in arc.coeffs])
    w = np.array(arc.lead)
    for eq in equations:
        ex = _Expander(eq.poly, w, active)
        if ex.empty:
            continue
        lau = arc_substitute(eq.poly, arc)
        if eq.floor is None:
            lowest = lau.top - order
        else:
            lowest = eq.floor
        mags = ex.expand(np.array([list(c) if c is not None else [0.0] * (arc.order + 1) for c in arc.coeffs]),
                         max(lau.top - lowest, 0), absolute=True)
        for e in range(lau.top, lowest - 1, -1):
            if e < lau.valid_down_to:
                break
            k = lau.top - e
            scale = mags[k] if k < len(mags) else 1.0
            if abs(float(lau.coefficient(e))) > 1e-7 * max(scale, 1e-300) and abs(float(lau.coefficient(e))) > 1e-12:
                return False
    return True


def _psi_vanishes(exp: List[Tuple[int | None, np.ndarray, np.ndarray]]) -> bool:
    for top, c, mag in exp:
        if top is None:
            continue
        if np.any(np.abs(c) > ORDER_TOL * np.maximum(mag, 1e-300)) and np.any(np.abs(c) > 1e-13):
            return False
    return True


def _psi_limit(exp) -> Tuple[float, ...] | None:
    """Limit of Psi along the arc; None if some component grows."""
    out = []
    for top, c, mag in exp:
        if top is None:
            out.append(0.0)
            continue
        val = 0.0
        for k, (v, s) in enumerate(zip(c, mag)):
            e = top - k
            significant = abs(v) > ORDER_TOL * max(s, 1e-300) and abs(v) > 1e-13
            if e > 0 and significant:
                return None
            if e == 0:
                val = v if significant else 0.0
        out.append(float(val))
    return tuple(out)


# ---------------------------------------------------------------------------
# Boundedness
# ---------------------------------------------------------------------------


def _groups_for(m: int, complex_pairs: bool):
    if complex_pairs:
        return [(2 * j, 2 * j + 1) for j in range(m // 2)]
    return [(j,) for j in range(m)]


def _search(equations, m, groups, wmax, K, seed, psi, accept, starts=32, keep=SOLUTIONS_PER_DIRECTION):
    """Run the direction enumeration; ``accept(ext)`` classifies extended arcs."""
    systems = _enumerate(equations, m, groups, wmax)
    stats = {"directions": len(systems), "leading_solutions": 0, "obstructed": 0, "rejected": 0,
             "unverified": 0}
    found = []
    for i, ls in enumerate(systems):
        rng = np.random.default_rng([seed, i])
        sols = solve_leading(ls, groups, m, rng, starts=starts, keep=keep)
        stats["leading_solutions"] += len(sols)
        for sol in sols:
            ext, bad = extend_arc(equations, ls, sol.point, K, psi)
            if ext is None:
                stats["obstructed"] += 1
                continue
            verdict = accept(ext)
            if verdict is None:
                stats["rejected"] += 1
                continue
            if not verify_arc(equations, ext.arc, ext.order):
                stats["unverified"] += 1
                continue
            found.append((ls, sol, ext, verdict))
    return found, stats


def boundedness(system: MilnorSystem, constraint: Constraint | str = Constraint.NONE,
                wmax: int = DEFAULT_WMAX, K: int = DEFAULT_ORDER, certificates: Sequence[Certificate] = (),
                psi: RealPolyMap | None = None, complex_pairs: bool = False, seed: int = 0,
                starts: int = 32) -> BoundednessVerdict:
    """Decide boundedness of the zero set of ``system`` (optionally within or off V)."""
    constraint = Constraint(constraint)
    for cert in certificates:
        if cert.verified:
            return BoundednessVerdict(BoundStatus.BOUNDED_CERT, f"{cert.name}: {cert.statement}", system,
                                      constraint, certificate=cert)
    if system.is_empty_exact():
        return BoundednessVerdict(BoundStatus.EMPTY, "a generator is a nonzero constant", system, constraint)
    m = system.m
    groups = _groups_for(m, complex_pairs)
    psi_polys = list(psi.components) if psi is not None else list(system.excluded_locus or ())
    if constraint is not Constraint.NONE and not psi_polys:
        raise ValueError("a V-constraint needs the map components")
    eqs = [Equation(g) for g in system.generators]
    if constraint is Constraint.INTERSECT_V:
        eqs += [Equation(p, floor=0) for p in psi_polys]

    def accept(ext):
        if constraint is Constraint.NONE:
            return "arc"
        if _psi_vanishes(ext.psi_expansion):
            return None  # the arc lies in V to the verified order
        return "arc off V"

    found, stats = _search(eqs, m, groups, wmax, K, seed, psi_polys, accept, starts=starts)
    if found and constraint is Constraint.INTERSECT_V:
        # necessary for an unbounded closure but not sufficient: the arc may only approach V
        ext = found[0][2]
        return BoundednessVerdict(BoundStatus.UNKNOWN,
                                  f"arc off V with Psi -> 0 found (lead exponents {list(ext.weights)}); "
                                  "it may approach V only asymptotically, so unboundedness of the closure "
                                  "is not decided", system, constraint, witness=ext.arc, wmax=wmax, order=K,
                                  stats=stats, alternatives=[f[2].arc for f in found[1:17]])
    if found:
        ls, sol, ext, _ = found[0]
        note = ""
        if sol.exact:
            note = "; exact leading coefficients " + ", ".join(
                f"a{j + 1}={sympy.sstr(v)}" for j, v in sorted(sol.exact.items()))
        return BoundednessVerdict(BoundStatus.UNBOUNDED,
                                  f"verified arc with lead exponents {list(ext.weights)} to order {ext.order}{note}",
                                  system, constraint, witness=ext.arc, wmax=wmax, order=K, stats=stats,
                                  alternatives=[f[2].arc for f in found[1:17]])
    if stats["obstructed"] or stats["unverified"]:
        return BoundednessVerdict(BoundStatus.UNKNOWN,
                                  "some leading solutions could not be extended or re-verified", system,
                                  constraint, wmax=wmax, order=K, stats=stats)
    return BoundednessVerdict(BoundStatus.BOUNDED_SEARCH,
                              f"no unbounded branch with leading exponents <= {wmax} and expansion order <= {K}",
                              system, constraint, wmax=wmax, order=K, stats=stats)


# ---------------------------------------------------------------------------
# Asymptotic nonregular values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitSample:
    value: Tuple[float, ...]
    arc: Arc
    radius: float

    def to_json(self):
        return {"value": list(self.value), "confidence_radius": self.radius, "arc": self.arc.to_json()}


@dataclass
class AsymptoticValueSet:
    limits: List[LimitSample]
    kind: str                      # "none" | "zero" | "finite" | "circle" | "unknown"
    center: Tuple[float, ...] | None = None
    radius: float | None = None
    clusters: List[Tuple[float, ...]] = field(default_factory=list)
    method: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def semi_tame(self) -> bool:
        """Every sampled limit is 0 (or there is none)."""
        return self.kind in ("none", "zero")

    def nonzero_limits(self, tol: float = 1e-6) -> List[LimitSample]:
        return [s for s in self.limits if np.linalg.norm(s.value) > tol]

    def to_json(self):
        return {"kind": self.kind, "center": None if self.center is None else list(self.center),
                "radius": self.radius, "clusters": [list(c) for c in self.clusters],
                "limits": [s.to_json() for s in self.limits], "method": self.method, "stats": self.stats}


def _fit_circle(points: np.ndarray):
    """Algebraic least-squares circle fit; returns (center, radius, max deviation)."""
    A = np.column_stack([2 * points[:, 0], 2 * points[:, 1], np.ones(len(points))])
    b = (points ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    c = sol[:2]
    r = float(np.sqrt(max(sol[2] + c @ c, 0.0)))
    dev = float(np.max(np.abs(np.linalg.norm(points - c, axis=1) - r)))
    return c, r, dev


def estimate_S(psi, wmax: int = DEFAULT_WMAX, K: int = DEFAULT_ORDER, samples: int = 16,
               seed: int = 0, starts: int = 64) -> AsymptoticValueSet:
    """Limits of Psi along verified arcs of M(Psi) that escape to infinity with Psi bounded."""
    complex_pairs = isinstance(psi, MixedPolynomial)
    psi = as_map(psi)
    system = milnor_system(psi)
    eqs = [Equation(g) for g in system.generators] + [Equation(p, floor=1) for p in psi.components]
    groups = _groups_for(psi.m, complex_pairs)
    found, stats = _search(eqs, psi.m, groups, wmax, K, seed, list(psi.components),
                           lambda ext: _psi_limit(ext.psi_expansion), starts=starts, keep=samples)
    limits = [LimitSample(tuple(v), ext.arc, 1e-8 * (1 + float(np.linalg.norm(v)))) for _, _, ext, v in found]
    method = f"arcs on the Milnor set, lead exponents <= {wmax}, expansion order >= {K}"
    if not limits:
        return AsymptoticValueSet([], "none", method=method, stats=stats)
    values = np.array([s.value for s in limits])
    norms = np.linalg.norm(values, axis=1)
    if np.all(norms <= 1e-6):
        return AsymptoticValueSet(limits, "zero", clusters=[tuple(0.0 for _ in values[0])], method=method,
                                  stats=stats)
    nonzero = values[norms > 1e-6]
    reps = cluster_points(list(values), 1e-6)
    clusters = [tuple(float(v) for v in r) for r in reps]
    distinct = cluster_points(list(nonzero), 1e-6)
    if psi.p == 2 and len(distinct) >= 4:
        c, r, dev = _fit_circle(np.array(distinct))
        if dev <= 1e-6 * max(1.0, r):
            return AsymptoticValueSet(limits, "circle", center=tuple(float(v) for v in c), radius=r,
                                      clusters=clusters, method=method, stats=stats)
        return AsymptoticValueSet(limits, "unknown", clusters=clusters, method=method, stats=stats)
    return AsymptoticValueSet(limits, "finite", clusters=clusters, method=method, stats=stats)


def _leading_term(top, c, mag):
    """(exponent, coefficient) of the first significant term, or None if all vanish."""
    if top is None:
        return None
    for k, (v, s) in enumerate(zip(c, mag)):
        if abs(v) > ORDER_TOL * max(s, 1e-300) and abs(v) > 1e-13:
            return top - k, k
    return None


def _quotient_limit(exp) -> Tuple[float, float] | None:
    """Limit of g/h from the expansions of (Re g, Im g, Re h, Im h); None if infinite."""
    lead_g = [_leading_term(*e) for e in exp[:2]]
    lead_h = [_leading_term(*e) for e in exp[2:]]
    if all(v is None for v in lead_h):
        return None  # the arc lies in V to the verified order
    eh = max(v[0] for v in lead_h if v is not None)
    if all(v is None for v in lead_g):
        return (0.0, 0.0)
    eg = max(v[0] for v in lead_g if v is not None)
    if eg > eh:
        return None
    if eg < eh:
        return (0.0, 0.0)

    def coeff(pair, e):
        out = []
        for top, c, _ in pair:
            k = top - e if top is not None else None
            out.append(float(c[k]) if k is not None and 0 <= k < len(c) else 0.0)
        return complex(*out)

    q = coeff(exp[:2], eg) / coeff(exp[2:], eh)
    return (q.real, q.imag)


def quotient_milnor_generators(g: MixedPolynomial, h: MixedPolynomial) -> List[RealPoly]:
    """Real generators of the Milnor set of the holomorphic quotient g/h off V(h).

    z lies in it iff conj(z) is complex-parallel to N = h dg - g dh, i.e. the
    mixed polynomials conj(z_i) N_j - conj(z_j) N_i vanish.
    """
    from .algebra import realify_pair

    if g.n != h.n:
        raise ValueError("g and h must share variables")
    n = g.n
    dg = [g.dz(j) for j in range(n)]
    dh = [h.dz(j) for j in range(n)]
    N = [h * a - g * b for a, b in zip(dg, dh)]
    zbar = [MixedPolynomial.zbar(n, j) for j in range(n)]
    gens = []
    for i in range(n):
        for j in range(i + 1, n):
            for part in realify_pair(zbar[i] * N[j] - zbar[j] * N[i]):
                if not part.is_zero():
                    gens.append(part)
    return gens


def estimate_S_quotient(g: MixedPolynomial, h: MixedPolynomial, wmax: int = DEFAULT_WMAX,
                        K: int = DEFAULT_ORDER, samples: int = 16, seed: int = 0,
                        starts: int = 64) -> AsymptoticValueSet:
    """Finite limits of g/h along verified arcs of its Milnor set escaping to infinity."""
    gens = quotient_milnor_generators(g, h)
    m = 2 * g.n
    parts = list(realify(g).components) + list(realify(h).components)
    eqs = [Equation(p) for p in gens]
    groups = _groups_for(m, True)
    found, stats = _search(eqs, m, groups, wmax, K, seed, parts, lambda ext: _quotient_limit(ext.psi_expansion),
                           starts=starts, keep=samples)
    limits = [LimitSample(tuple(v), ext.arc, 1e-8 * (1 + float(np.linalg.norm(v)))) for _, _, ext, v in found]
    method = f"arcs on the Milnor set of g/h, lead exponents <= {wmax}, expansion order >= {K}"
    if not limits:
        return AsymptoticValueSet([], "none", method=method, stats=stats)
    values = np.array([s.value for s in limits])
    clusters = [tuple(float(v) for v in r) for r in cluster_points(list(values), 1e-6)]
    kind = "zero" if np.all(np.linalg.norm(values, axis=1) <= 1e-6) else "finite"
    return AsymptoticValueSet(limits, kind, clusters=clusters, method=method, stats=stats)


# ---------------------------------------------------------------------------
# Radius sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    radius: float
    count: int
    min_residual: float
    min_dist_to_V: float
    points: List[Tuple[float, ...]] = field(default_factory=list)


@dataclass
class SweepReport:
    rows: List[SweepRow]
    cluster_radius: str = "1e-4 * R"
    tube_radius: str = "1e-3 * R"
    starts: int = DEFAULT_STARTS
    seed: int = 0

    def to_json(self):
        return {"cluster_radius": self.cluster_radius, "tube_radius": self.tube_radius,
                "starts": self.starts, "seed": self.seed,
                "rows": [{"R": r.radius, "count": r.count, "min_residual": r.min_residual,
                          "min_dist_to_V": r.min_dist_to_V, "points": [list(p) for p in r.points]}
                         for r in self.rows]}

    def to_csv(self) -> str:
        lines = ["R,count,min_residual,min_dist_to_V"]
        for r in self.rows:
            lines.append(f"{r.radius!r},{r.count},{r.min_residual!r},{r.min_dist_to_V!r}")
        return "\n".join(lines) + "\n"


def _dist_to_zero_set(system: PolySystem, y: np.ndarray) -> float:
    """First-order distance estimate |Psi(y)| / ||DPsi(y)||."""
    v = system.values(y)[0]
    J = system.jacobian(y)
    g = np.linalg.norm(J)
    n = np.linalg.norm(v)
    if g == 0:
        return np.inf if n > 0 else 0.0
    return float(n / g)


def radius_sweep(psi, radii: Sequence[float] = (10.0, 100.0, 1000.0), starts: int = DEFAULT_STARTS,
                 seed: int = 0) -> SweepReport:
    """Count solutions of the angular Milnor system on spheres of growing radius, off a tube around V."""
    psi = as_map(psi)
    if psi.p < 2:
        raise ValueError("radius sweeps need p >= 2")
    radii = sorted(float(r) for r in radii)
    gens = milnor_quotient_system(psi).generators
    rows = []
    for i, R in enumerate(radii):
        rng = np.random.default_rng([seed, i])
        gsys = PolySystem(scaled_polys(gens, R)) if gens else None
        vsys = PolySystem(scaled_polys(psi.components, R))
        sols, resid, dists = [], [], []
        for _ in range(starts):
            # mixed scales reach branches that hug coordinate hyperplanes
            y0 = rng.normal(size=psi.m) * R ** (-rng.choice([0.0, 0.0, 1.0, 2.0], size=psi.m))
            y0 /= np.linalg.norm(y0)
            if gsys is None:
                y = y0
            else:
                y = gsys.refine(y0, extra=lambda y: np.array([y @ y - 1.0]),
                                extra_jac=lambda y: 2 * y[None, :], max_nfev=300, relative=True)
            if not np.all(np.isfinite(y)) or abs(np.linalg.norm(y) - 1) > 1e-8:
                continue
            r = gsys.relative_residual(y) if gsys is not None else 0.0
            if r > 1e-10:
                continue
            d = _dist_to_zero_set(vsys, y)
            if d < 1e-3:
                continue
            resid.append(r)
            dists.append(d * R)
            sols.append(y)
        reps = cluster_points(sols, 1e-4)
        rows.append(SweepRow(R, len(reps), min(resid) if resid else float("nan"),
                             min(dists) if dists else float("nan"),
                             [tuple(float(v) * R for v in p) for p in reps[:32]]))
    return SweepReport(rows, starts=starts, seed=seed)
