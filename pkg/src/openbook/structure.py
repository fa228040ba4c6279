"""Weighted homogeneity, Newton polyhedra, torus criticality and codimension at infinity."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import List, Sequence, Tuple

import numpy as np
import sympy
from scipy.optimize import Bounds, LinearConstraint, least_squares, milp
from scipy.spatial import ConvexHull

from .algebra import (CompiledPoly, MixedPolynomial, RealPoly, RealPolyMap, realify)
from .numeric import PolyBatch, PolySystem, gauss_newton, rank_drop

WEIGHT_BOUND = 10_000


def as_map(f) -> RealPolyMap:
    if isinstance(f, MixedPolynomial):
        return realify(f)
    if isinstance(f, RealPoly):
        return RealPolyMap((f,))
    return f


# ---------------------------------------------------------------------------
# Radial and polar weighted homogeneity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialCertificate:
    weights: Tuple[int, ...]
    degree: int

    def to_json(self):
        return {"weights": list(self.weights), "degree": self.degree}


@dataclass(frozen=True)
class PolarCertificate:
    weights: Tuple[int, ...]
    degree: int

    @property
    def all_nonzero(self) -> bool:
        return all(self.weights)

    def to_json(self):
        return {
            "weights": list(self.weights),
            "degree": self.degree,
            "all_weights_nonzero": self.all_nonzero,
            # the conjugate circle action gives the sign-flipped pair
            "sign_flipped": {"weights": [-p for p in self.weights], "degree": -self.degree},
        }


def _integer_solve(rows: List[List[int]], nvars: int, lower, upper, cost, integrality=None):
    """Integer program ``rows @ v == 0``; returns the solution or None."""
    A = np.array(rows, dtype=float).reshape(len(rows), nvars)
    cons = [LinearConstraint(A, 0, 0)] if len(rows) else []
    res = milp(c=np.asarray(cost, dtype=float), constraints=cons,
               integrality=np.ones(nvars) if integrality is None else integrality,
               bounds=Bounds(lower, upper))
    if res.status != 0 or res.x is None:
        return None
    return [int(round(v)) for v in res.x]


def _radial_rows(f) -> Tuple[int, List[Tuple[int, ...]]]:
    """(number of variables, list of (exponent vector, component index))."""
    if isinstance(f, MixedPolynomial):
        return f.n, [(s, 0) for s in f.support()]
    psi = as_map(f)
    pts = []
    for i, c in enumerate(psi.components):
        pts.extend((e, i) for e in c.terms)
    return psi.m, pts


def detect_radial(f) -> RadialCertificate | None:
    """Positive integer weights q and the least degree d with q . s = d on every term."""
    nv, pts = _radial_rows(f)
    if not pts:
        raise ValueError("zero input has no homogeneity certificate")
    rows = [list(s) + [-1] for s, _ in sorted(set(pts))]
    cost = [1.0] * nv + [float(WEIGHT_BOUND * nv)]
    sol = _integer_solve(rows, nv + 1, [1] * nv + [1], [WEIGHT_BOUND] * (nv + 1), cost)
    if sol is None:
        return None
    q, d = sol[:nv], sol[nv]
    g = 0
    for v in q:
        g = gcd(g, v)
    q = [v // g for v in q]
    d //= g
    if any(sum(a * b for a, b in zip(s, q)) != d for s, _ in pts):
        return None
    return RadialCertificate(tuple(q), d)


def detect_polar(f: MixedPolynomial) -> PolarCertificate | None:
    """Integer weights p (gcd 1) and a positive k with sum p_j (nu_j - mu_j) = k on every term.

    Tries, in order: all weights positive, all weights nonzero, unrestricted.
    """
    if f.is_zero():
        raise ValueError("zero input has no homogeneity certificate")
    n = f.n
    diffs = sorted({tuple(a - b for a, b in zip(nu, mu)) for nu, mu in f.terms})
    B = 64
    big = float(10 * n * B)

    def finish(p, k):
        g = 0
        for v in p:
            g = gcd(g, v)
        if g == 0 or k <= 0:
            return None
        p = [v // g for v in p]
        k //= g
        if any(sum(a * b for a, b in zip(s, p)) != k for s in diffs):
            return None
        return PolarCertificate(tuple(p), k)

    # positive weights
    rows = [list(s) + [-1] for s in diffs]
    sol = _integer_solve(rows, n + 1, [1] * n + [1], [B] * n + [B * B], [1.0] * n + [big])
    if sol is not None:
        cert = finish(sol[:n], sol[n])
        if cert is not None:
            return cert
    # signed weights p = u - v, binaries b_j select the sign; |p_j| >= 1 when nonzero is enforced
    for enforce_nonzero in (True, False):
        nvar = 3 * n + 1
        eq = [list(s) + [-a for a in s] + [0] * n + [-1] for s in diffs]
        A_eq = np.array(eq, dtype=float).reshape(len(eq), nvar)
        ineq = []
        lo, hi = [], []
        for j in range(n):
            row = [0.0] * nvar
            row[j], row[2 * n + j] = 1.0, -B  # u_j <= B b_j
            ineq.append(row); lo.append(-np.inf); hi.append(0.0)
            row = [0.0] * nvar
            row[n + j], row[2 * n + j] = 1.0, B  # v_j <= B (1 - b_j)
            ineq.append(row); lo.append(-np.inf); hi.append(float(B))
            if enforce_nonzero:
                row = [0.0] * nvar
                row[j], row[n + j] = 1.0, 1.0
                ineq.append(row); lo.append(1.0); hi.append(np.inf)
        cons = [LinearConstraint(A_eq, 0, 0), LinearConstraint(np.array(ineq), lo, hi)]
        cost = [1.0] * (2 * n) + [0.0] * n + [big]
        res = milp(c=np.array(cost), constraints=cons, integrality=np.ones(nvar),
                   bounds=Bounds([0] * (3 * n) + [1], [B] * (2 * n) + [1] * n + [B * B]))
        if res.status == 0 and res.x is not None:
            x = [int(round(v)) for v in res.x]
            cert = finish([x[j] - x[n + j] for j in range(n)], x[3 * n])
            if cert is not None:
                return cert
    return None


def euler_defect(psi: RealPolyMap, cert: RadialCertificate) -> Tuple[RealPoly, ...]:
    """``sum_j q_j x_j dPsi_i/dx_j - d Psi_i`` per component (zero for a valid certificate)."""
    out = []
    for c in psi.components:
        acc = RealPoly(psi.m)
        for j in range(psi.m):
            acc = acc + RealPoly.var(psi.m, j) * c.diff(j) * cert.weights[j]
        out.append(acc - c * cert.degree)
    return tuple(out)


def realified_weights(cert: RadialCertificate) -> RadialCertificate:
    """Radial weights of a mixed polynomial acting on the interleaved real coordinates."""
    return RadialCertificate(tuple(q for q in cert.weights for _ in (0, 1)), cert.degree)


# ---------------------------------------------------------------------------
# Newton polyhedron
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Face:
    index: int
    points: Tuple[Tuple[int, ...], ...]
    dimension: int
    normals: Tuple[Tuple[Fraction, ...], ...]
    functional: Tuple[Fraction, ...]
    at_infinity: bool
    heuristic_bad: bool = False

    def to_json(self):
        return {
            "index": self.index,
            "points": [list(p) for p in self.points],
            "dimension": self.dimension,
            "supporting_vector": [str(v) for v in self.functional],
            "facet_normals": [[str(v) for v in nrm] for nrm in self.normals],
            "at_infinity": self.at_infinity,
            "heuristic_strictly_bad_candidate": self.heuristic_bad,
        }


@dataclass(frozen=True)
class NewtonPolyhedron:
    support: Tuple[Tuple[int, ...], ...]
    vertices: Tuple[Tuple[int, ...], ...]
    faces: Tuple[Face, ...]
    full_lattice: bool = True

    def facets(self) -> Tuple[Face, ...]:
        top = max((f.dimension for f in self.faces if f.normals), default=0)
        return tuple(f for f in self.faces if f.dimension == top and len(f.normals) <= 1)

    def faces_at_infinity(self) -> Tuple[Face, ...]:
        return tuple(f for f in self.faces if f.at_infinity)

    def face_with_points(self, points) -> Face:
        key = tuple(sorted(tuple(p) for p in points))
        for f in self.faces:
            if f.points == key:
                return f
        raise KeyError(f"no face with support {key}")

    def to_json(self):
        return {
            "support": [list(p) for p in self.support],
            "vertices": [list(v) for v in self.vertices],
            "faces": [f.to_json() for f in self.faces],
            "full_face_lattice": self.full_lattice,
        }


def _affine_frame(points: np.ndarray):
    """Dimension of the affine hull, pivot coordinates, and its orthogonal complement (exact)."""
    base = points[0]
    diffs = sympy.Matrix([[int(v) for v in p - base] for p in points[1:]]) if len(points) > 1 else None
    n = points.shape[1]
    if diffs is None or diffs.rank() == 0:
        comp = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
        return 0, [], comp
    rref, pivots = diffs.T.rref()  # pivot columns of diffs^T index difference vectors
    d = len(pivots)
    _, coord_pivots = diffs.rref()
    ns = diffs.nullspace()
    comp = [tuple(Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in vec) for vec in ns]
    return d, list(coord_pivots), comp


def _exact_normal(face_pts: np.ndarray, pivots: List[int]) -> Tuple[Fraction, ...]:
    """Normal of the hyperplane through face points, inside the pivot coordinates."""
    proj = face_pts[:, pivots]
    diffs = sympy.Matrix([[int(v) for v in p - proj[0]] for p in proj[1:]])
    ns = diffs.nullspace()
    if len(ns) != 1:
        raise ArithmeticError("degenerate facet")
    vec = ns[0]
    den = sympy.ilcm(*[sympy.fraction(v)[1] for v in vec])
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    return tuple(Fraction(v // g) for v in ints)


def newton_polyhedron(f) -> NewtonPolyhedron:
    """Convex hull of the support points nu + mu (exponents for a real polynomial)."""
    if isinstance(f, MixedPolynomial):
        n = f.n
        support = f.support()
    else:
        n = f.m
        support = tuple(sorted(set(f.terms)))
    if n > 8:
        raise ValueError("Newton polyhedra are limited to n <= 8 variables")
    if not support:
        raise ValueError("zero polynomial has empty support")
    pts = np.array(support, dtype=np.int64)
    d, pivots, complement = _affine_frame(pts)
    full = n <= 4

    facet_sets: List[Tuple[frozenset, Tuple[Fraction, ...]]] = []
    if d == 0:
        facet_sets = []
    elif d == 1:
        piv = pivots[0]
        direction = pts[1:] - pts[0]
        dvec = next(v for v in direction if v[piv] != 0)
        g = 0
        for v in dvec:
            g = gcd(g, int(v))
        dvec = [Fraction(int(v) // g) for v in dvec]
        for sgn in (1, -1):
            vals = [sgn * sum(int(a) * b for a, b in zip(p, dvec)) for p in support]
            top = max(vals)
            nrm = tuple(sgn * v for v in dvec)
            facet_sets.append((frozenset(i for i, v in enumerate(vals) if v == top), nrm))
    else:
        proj = pts[:, pivots].astype(float)
        hull = ConvexHull(proj)
        seen = set()
        for simplex in hull.simplices:
            nrm_proj = _exact_normal(pts[simplex], pivots)
            normal = [Fraction(0)] * n
            for c, v in zip(pivots, nrm_proj):
                normal[c] = v
            vals = [sum(Fraction(int(a)) * b for a, b in zip(p, normal)) for p in support]
            if max(vals) != vals[simplex[0]]:
                normal = [-v for v in normal]
                vals = [-v for v in vals]
            top = max(vals)
            members = frozenset(i for i, v in enumerate(vals) if v == top)
            if members not in seen:
                seen.add(members)
                facet_sets.append((members, tuple(normal)))

    # close facets under intersection
    faces: dict = {}
    for members, nrm in facet_sets:
        faces.setdefault(members, set()).add(nrm)
    if full:
        changed = True
        while changed:
            changed = False
            keys = list(faces)
            for a, b in combinations(keys, 2):
                inter = a & b
                if inter and inter not in faces:
                    faces[inter] = set()
                    changed = True
        for key in faces:
            faces[key] = {nrm for members, nrm in facet_sets if key <= members}
    if d < n:
        faces.setdefault(frozenset(range(len(support))), set())
    if d == 0:
        faces = {frozenset([0]): set()}

    lineal = complement  # functionals constant on the polytope
    out = []
    vertices = sorted({support[next(iter(k))] for k in faces if len(k) == 1})
    for members in sorted(faces, key=lambda k: (len(k), sorted(k))):
        normals = tuple(sorted(faces[members]))
        fpts = tuple(sorted(support[i] for i in members))
        fdim = _dimension(fpts)
        functional = [sum((nrm[j] for nrm in normals), Fraction(0)) for j in range(n)]
        at_inf = any(v > 0 for nrm in normals for v in nrm) or bool(lineal)
        if not any(v > 0 for v in functional) and lineal:
            ell = lineal[0]
            if not any(v > 0 for v in ell):
                ell = tuple(-v for v in ell)
            scale = 1 + sum(abs(v) for v in functional)
            functional = [a + scale * b for a, b in zip(functional, ell)]
        mixed_signs = any(v > 0 for v in functional) and any(v < 0 for v in functional)
        out.append(Face(len(out), fpts, fdim, normals, tuple(functional), at_inf,
                        heuristic_bad=(fdim == 1 and mixed_signs and at_inf)))
    return NewtonPolyhedron(tuple(support), tuple(vertices), tuple(out), full_lattice=full)


def _dimension(points) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return sympy.Matrix([[a - b for a, b in zip(p, base)] for p in points[1:]]).rank()


def face_polynomial(f: MixedPolynomial, face: Face) -> MixedPolynomial:
    """Sum of the terms of f whose support point lies on ``face``."""
    support = set(f.support())
    if not set(face.points) <= support:
        raise ValueError("face does not belong to the Newton polyhedron of f")
    members = set(face.points)
    return MixedPolynomial(f.n, {k: c for k, c in f.terms.items()
                                 if tuple(a + b for a, b in zip(*k)) in members})


# ---------------------------------------------------------------------------
# Criticality of f/|f| on the torus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusSearch:
    empty: bool
    witness: Tuple[complex, ...] | None
    starts: int
    seed: int
    best_residual: float

    @property
    def status(self) -> str:
        return "EmptyUpToSearch" if self.empty else "Witness"

    def to_json(self):
        return {
            "status": self.status,
            "witness": None if self.witness is None else [[z.real, z.imag] for z in self.witness],
            "starts": self.starts,
            "seed": self.seed,
            "best_residual": self.best_residual,
        }


class _AngularResidual:
    """Scale-free measure of d(arg f) at a torus point given in log-polar coordinates."""

    def __init__(self, f: MixedPolynomial):
        psi = realify(f)
        u, v = psi.components
        m = 2 * f.n
        self.n = f.n
        self.batch = PolyBatch([u, v] + list(u.gradient()) + list(v.gradient()), m)
        self.mag = [CompiledPoly(u), CompiledPoly(v)]

    def point(self, params):
        rho, theta = params[:self.n], params[self.n:]
        z = np.exp(rho + 1j * theta)
        x = np.empty(2 * self.n)
        x[0::2], x[1::2] = z.real, z.imag
        return z, x

    def __call__(self, params):
        _, x = self.point(params)
        vals = self.batch(x)
        m = 2 * self.n
        u, v, gu, gv = vals[0], vals[1], vals[2:2 + m], vals[2 + m:]
        omega = u * gv - v * gu
        scale = np.hypot(u, v) * (np.linalg.norm(gu) + np.linalg.norm(gv)) + 1e-300
        return omega / scale

    def image_size(self, params):
        _, x = self.point(params)
        vals = self.batch(x)
        X = x[None, :]
        return float(np.hypot(vals[0], vals[1])), float(self.mag[0].magnitude(X)[0] + self.mag[1].magnitude(X)[0])


def quotient_critical_on_torus(f: MixedPolynomial, starts: int = 512, seed: int = 0,
                               log_radius: float = 3.0, tol: float = 1e-10) -> TorusSearch:
    """Multistart search for critical points of f/|f| on (C*)^n off f = 0."""
    res = _AngularResidual(f)
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(starts):
        x0 = np.concatenate([rng.uniform(-log_radius, log_radius, f.n), rng.uniform(-np.pi, np.pi, f.n)])
        r0 = res(x0)
        if not np.all(np.isfinite(r0)):
            continue
        if np.linalg.norm(r0) > tol:
            try:
                sol = least_squares(res, x0, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400)
            except (ValueError, FloatingPointError):
                continue
            x = sol.x
        else:
            x = x0
        r = res(x)
        if not np.all(np.isfinite(r)):
            continue
        val = float(np.linalg.norm(r))
        if np.any(np.abs(x[:f.n]) > 2 * log_radius + 4):
            continue  # drifted toward a coordinate hyperplane or infinity
        size, mag = res.image_size(x)
        if size <= 1e-9 * max(mag, 1e-300):
            continue  # on f = 0
        best = min(best, val)
        if val <= tol:
            z, _ = res.point(x)
            return TorusSearch(False, tuple(complex(v) for v in z), starts, seed, val)
    return TorusSearch(True, None, starts, seed, float(best))


# ---------------------------------------------------------------------------
# Codimension of V at infinity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CodimResult:
    status: str  # "Confirmed" | "Violated" | "Unknown"
    codim: int | None
    samples: int
    witness: Tuple[float, ...] | None = None
    note: str = ""

    def to_json(self):
        return {"status": self.status, "codim": self.codim, "samples": self.samples,
                "witness": None if self.witness is None else list(self.witness), "note": self.note}


def scaled_polys(polys: Sequence[RealPoly], R: float) -> List[RealPoly]:
    """Rewrite ``g(x)`` with ``x = R y`` as ``g(R y) / R^deg g`` (exact)."""
    Rq = Fraction(R)
    out = []
    for g in polys:
        d = g.degree()
        out.append(RealPoly(g.m, {e: c * Rq ** (sum(e) - d) for e, c in g.terms.items()}))
    return out


def _on_zero_set(system: PolySystem, y: np.ndarray, tol: float = 1e-12) -> bool:
    # absolute test: y lives on the unit sphere after rescaling, so all terms are O(1)
    return bool(np.all(np.abs(system.values(y)[0]) / system.scales <= tol))


def _local_codim(system: PolySystem, y: np.ndarray, rng, eps: float = 1e-2) -> int:
    m = system.m
    J = system.jacobian(y)
    dropped, _ = rank_drop(J, 1e-6) if J.shape[0] <= m else (True, 0.0)
    if not dropped and J.shape[0] <= m:
        return J.shape[0]
    diffs = []
    for _ in range(4 * m):
        y0 = y + eps * rng.normal(size=m) / np.sqrt(m)
        yp = gauss_newton(system, system.refine(y0, max_nfev=400), None, 1e-13)
        if _on_zero_set(system, yp) and np.linalg.norm(yp - y) < 10 * eps:
            diffs.append(yp - y)
    if len(diffs) < m:
        return -1
    sv = np.linalg.svd(np.array(diffs), compute_uv=False)
    sv = sv / sv[0]
    dim = int(np.sum(sv > 0.05))
    return m - dim


def codim_at_infinity(psi, R0: float = 1e3, starts: int = 64, seed: int = 0) -> CodimResult:
    """Sample V outside B_R0 and estimate the local real codimension at each sample."""
    psi = as_map(psi)
    p = psi.p
    rng = np.random.default_rng(seed)
    system = PolySystem(scaled_polys(psi.components, R0))
    found = []
    for _ in range(starts):
        y0 = rng.normal(size=psi.m)
        y0 /= np.linalg.norm(y0)
        y = system.refine(y0, max_nfev=400, extra=lambda y: np.array([y @ y - 1.0]),
                          extra_jac=lambda y: 2 * y[None, :])
        y = gauss_newton(system, y, 1.0, 1e-13)
        if abs(np.linalg.norm(y) - 1) < 1e-6 and _on_zero_set(system, y):
            if not any(np.linalg.norm(y - z) < 1e-4 for z in found):
                found.append(y)
    if not found:
        return CodimResult("Unknown", None, 0, note="no point of V found outside the ball: empty at infinity?")
    codims = []
    for y in found[:16]:
        c = _local_codim(system, y, rng)
        codims.append(c)
        if c >= 0 and c != p:
            return CodimResult("Violated", c, len(codims), witness=tuple(float(v) * R0 for v in y),
                               note=f"local codimension {c} != {p}")
    if all(c == p for c in codims):
        return CodimResult("Confirmed", p, len(codims))
    return CodimResult("Unknown", None, len(codims), note="local dimension estimate inconclusive")
