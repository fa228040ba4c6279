"""Symbolic systems cutting out Sing, the Milnor set, the angular Milnor set and V."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .algebra import (I, MixedPolynomial, RealPoly, RealPolyMap, complex_to_real, realify,
                      wirtinger)
from .numeric import DEFAULT_TOL, rank_drop

# The rank rule for the angular Milnor set: rank([omega rows; x]) <= p - 1.
QUOTIENT_RANK_NOTE = (
    "angular Milnor set taken as rank([omega_ij; x]) <= p-1 (all p x p minors vanish); "
    "a bound of rank <= p would hold everywhere for p = 2"
)


class SystemKind(str, enum.Enum):
    SING = "SING"
    MILNOR = "MILNOR"
    MILNOR_QUOTIENT = "MILNOR_QUOTIENT"
    ZERO_LOCUS = "ZERO_LOCUS"


@dataclass(frozen=True)
class MilnorSystem:
    kind: SystemKind
    names: Tuple[str, ...]
    generators: Tuple[RealPoly, ...]
    excluded_locus: Tuple[RealPoly, ...] | None = None
    provenance: str = ""

    @property
    def m(self) -> int:
        return len(self.names)

    def is_whole_space(self) -> bool:
        return not self.generators

    def is_empty_exact(self) -> bool:
        """True when some generator is a nonzero constant."""
        return any(g.is_constant() and not g.is_zero() for g in self.generators)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "vars": list(self.names),
            "generators": [g.to_str(self.names) for g in self.generators],
            "excluded_locus": None if self.excluded_locus is None
            else [g.to_str(self.names) for g in self.excluded_locus],
            "provenance": self.provenance,
        }


def determinant(rows: Sequence[Sequence[RealPoly]]) -> RealPoly:
    """Laplace expansion along the first row with memoized sub-minors."""
    k = len(rows)
    memo: Dict[Tuple[int, Tuple[int, ...]], RealPoly] = {}

    def det(r: int, cols: Tuple[int, ...]) -> RealPoly:
        if len(cols) == 1:
            return rows[r][cols[0]]
        key = (r, cols)
        if key in memo:
            return memo[key]
        total = None
        for idx, c in enumerate(cols):
            entry = rows[r][c]
            if entry.is_zero():
                continue
            sub = det(r + 1, cols[:idx] + cols[idx + 1:])
            term = entry * sub
            total = (term if idx % 2 == 0 else -term) if total is None else (
                total + term if idx % 2 == 0 else total - term)
        if total is None:
            total = RealPoly(rows[0][0].m)
        memo[key] = total
        return total

    return det(0, tuple(range(k)))


def minors(matrix: Sequence[Sequence[RealPoly]], size: int) -> List[RealPoly]:
    """All ``size x size`` minors, zero ones dropped and exact duplicates merged."""
    nrows = len(matrix)
    ncols = len(matrix[0])
    seen = set()
    out = []
    for rs in combinations(range(nrows), size):
        for cs in combinations(range(ncols), size):
            d = determinant([[matrix[r][c] for c in cs] for r in rs])
            if not d.is_zero() and d not in seen:
                seen.add(d)
                out.append(d)
    return out


def _position_row(m: int) -> Tuple[RealPoly, ...]:
    return tuple(RealPoly.var(m, j) for j in range(m))


def sing_system(psi: RealPolyMap) -> MilnorSystem:
    """p x p minors of the Jacobian."""
    gens = minors(psi.jacobian(), psi.p)
    if not gens:
        gens = []
    return MilnorSystem(SystemKind.SING, psi.names, tuple(gens),
                        provenance=f"{psi.p}x{psi.p} minors of the Jacobian")


def milnor_system(psi: RealPolyMap) -> MilnorSystem:
    """(p+1) x (p+1) minors of [grad Psi_1; ...; grad Psi_p; x].

    For m = p the matrix has rank <= p everywhere and the system has no
    generators, i.e. it describes the whole space.
    """
    p, m = psi.p, psi.m
    if m < p + 1:
        return MilnorSystem(SystemKind.MILNOR, psi.names, (),
                            provenance="m = p: rank of the (p+1) x p matrix never exceeds p, whole space")
    mat = list(psi.jacobian()) + [_position_row(m)]
    return MilnorSystem(SystemKind.MILNOR, psi.names, tuple(minors(mat, p + 1)),
                        provenance=f"{p + 1}x{p + 1} minors of [Jacobian; position]")


@dataclass(frozen=True)
class OmegaMatrix:
    pairs: Tuple[Tuple[int, int], ...]
    rows: Tuple[Tuple[RealPoly, ...], ...]
    position: Tuple[RealPoly, ...]

    def matrix(self) -> List[Tuple[RealPoly, ...]]:
        return list(self.rows) + [self.position]

    def row(self, i: int, j: int) -> Tuple[RealPoly, ...]:
        if i == j:
            raise ValueError("omega_ii is not defined")
        if i < j:
            return self.rows[self.pairs.index((i, j))]
        return tuple(-e for e in self.rows[self.pairs.index((j, i))])


def omega_matrix(psi: RealPolyMap) -> OmegaMatrix:
    if psi.p < 2:
        raise ValueError("omega matrix needs p >= 2")
    grads = psi.jacobian()
    pairs = tuple(combinations(range(psi.p), 2))
    rows = []
    for i, j in pairs:
        a, b = psi.components[i], psi.components[j]
        rows.append(tuple(a * gb - b * ga for ga, gb in zip(grads[i], grads[j])))
    return OmegaMatrix(pairs, tuple(rows), _position_row(psi.m))


def milnor_quotient_system(psi: RealPolyMap) -> MilnorSystem:
    """p x p minors of [omega rows; x]; read off V."""
    om = omega_matrix(psi)
    gens = minors(om.matrix(), psi.p)
    return MilnorSystem(SystemKind.MILNOR_QUOTIENT, psi.names, tuple(gens),
                        excluded_locus=tuple(psi.components),
                        provenance=QUOTIENT_RANK_NOTE)


def zero_system(psi: RealPolyMap) -> MilnorSystem:
    return MilnorSystem(SystemKind.ZERO_LOCUS, psi.names, tuple(c for c in psi.components if not c.is_zero()),
                        provenance="components of the map")


# ---------------------------------------------------------------------------
# Mixed side
# ---------------------------------------------------------------------------

# realify(nabla f) == NABLA_OMEGA_CONSTANT * omega_12(realify f)
NABLA_OMEGA_CONSTANT = -1


def nabla(f: MixedPolynomial) -> Tuple[MixedPolynomial, ...]:
    """Componentwise ``i (conj(f) dbar_f - f conj(df))``."""
    df, dbf = wirtinger(f)
    fb = f.conjugate()
    return tuple(I * (fb * b - f * a.conjugate()) for a, b in zip(df, dbf))


def realify_field(components: Sequence[MixedPolynomial]) -> Tuple[RealPoly, ...]:
    """Interleave (Re, Im) of each component into a 2n-vector of real polynomials."""
    from .algebra import realify_pair

    out = []
    for c in components:
        out.extend(realify_pair(c))
    return tuple(out)


def mixed_milnor_membership(f: MixedPolynomial, z: Sequence[complex], tol: float = DEFAULT_TOL):
    """Is z in M(f)?  Returns ``(member, residual)``.

    Decided as: the real 2n-vector of z lies in the real span of grad Re f and
    grad Im f (rank of the row-normalized 3 x 2n matrix drops).  Points where
    that span degenerates (singular points of f) count as members; so does z = 0.
    """
    x = np.array([float(v) for v in complex_to_real(z)])
    if not np.any(x):
        return True, 0.0
    psi = realify(f)
    grads = np.array([[float(g.eval(list(x))) for g in comp.gradient()] for comp in psi.components])
    dropped, smin = rank_drop(np.vstack([grads, x]), tol)
    return dropped, smin


def sample_points(system: MilnorSystem, starts: int = 256, seed: int = 0, scale: float = 2.0,
                  tol: float = 1e-13, cluster: float = 1e-6, dist_tol: float = 1e-9) -> List[np.ndarray]:
    """Multistart zeros of the generators, deduplicated.

    Each start gets a short Levenberg-Marquardt run and then Gauss-Newton
    polishing.  Acceptance is absolute (``|g| <= tol * content(g)``) so points on
    high-multiplicity components are kept.  Every other start is held on the
    sphere through its start point.  A point is kept only when the first-order distance estimate
    ``|g| / |grad g|`` is below ``dist_tol`` for every generator; that estimate
    stays honest near multiple components, where it is about distance / k.
    """
    from .numeric import PolySystem, cluster_points, gauss_newton, newton_distance

    if system.is_whole_space():
        raise ValueError("the system describes the whole space")
    if system.is_empty_exact():
        return []
    ps = PolySystem(system.generators)
    rng = np.random.default_rng(seed)
    found = []
    for i in range(starts):
        x0 = rng.normal(scale=scale, size=system.m)
        r2 = float(x0 @ x0)
        if i % 2:
            # sphere-constrained start: homogeneous pieces otherwise collapse onto the origin
            x = ps.refine(x0, max_nfev=200, extra=lambda x: np.array([(x @ x - r2) / r2]),
                          extra_jac=lambda x: 2 * x[None, :] / r2)
        else:
            x = ps.refine(x0, max_nfev=400)
        x = gauss_newton(ps, x, r2 if i % 2 else None, dist_tol)
        if not np.all(np.isfinite(x)):
            continue
        if np.all(np.abs(ps.values(x)[0]) <= tol * ps.scales) and newton_distance(ps, x) <= dist_tol:
            found.append(x)
    return cluster_points(found, cluster)

