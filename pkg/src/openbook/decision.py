"""Rule engine: from checked regularity conditions to an open-book verdict at infinity.

Rules are named by what they use, not where they come from:

* ``polar-homogeneous``: polar weighted homogeneity with nonzero weights and
  codim V = 2 at infinity gives an open book with singular binding.
* ``semi-tame-holomorphic``: a holomorphic f with S(f) in {0}.
* ``equivalence``: with codim V = p at infinity and cl(M(Psi)\\V) cap V
  bounded, the open book exists iff M(Psi/|Psi|) is bounded.
* ``smooth-binding``: Sing(Psi) cap V bounded makes the previous criterion
  apply with a smooth binding.

Sub-rules feeding boundedness of M(Psi/|Psi|): ``radial-homogeneous``,
``semi-tame-mixed``, ``g-hbar`` and ``face-criterion``; the lemma
``sing-cap-V-bounded`` feeds the closure condition.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .algebra import MixedPolynomial, RealPolyMap, conj_product, realify
from .asymptotics import (DEFAULT_ORDER, DEFAULT_WMAX, BoundednessVerdict, BoundStatus, Certificate,
                          Constraint, boundedness, estimate_S, estimate_S_quotient)
from .milnor import (MilnorSystem, SystemKind, milnor_quotient_system, milnor_system, omega_matrix,
                     sample_points, sing_system)
from .numeric import PolySystem, cluster_points
from .structure import (as_map, codim_at_infinity, detect_polar, detect_radial, face_polynomial,
                        newton_polyhedron, quotient_critical_on_torus)

log = logging.getLogger(__name__)

SCHEMA = "1"

THOM_NOTE = ("the open book is asserted without any claim of Thom regularity; "
             "non-holomorphic inputs may fail it")

CITATIONS = {
    "polar-homogeneous": "a polar weighted-homogeneous mixed polynomial with all polar weights nonzero and "
                         "V of real codimension 2 at infinity induces an open book structure with singular "
                         "binding on large spheres",
    "semi-tame-holomorphic": "a holomorphic polynomial with S(f) contained in {0} induces an open book "
                             "(K_R, f/|f|) on large spheres",
    "equivalence": "if codim V = p at infinity and cl(M(Psi)\\V) cap V is bounded, then Psi/|Psi| is an open "
                   "book with singular binding on large spheres iff M(Psi/|Psi|) is bounded",
    "smooth-binding": "if codim V = p at infinity and Sing(Psi) cap V is bounded, then Psi/|Psi| is an open "
                      "book with smooth binding on large spheres iff M(Psi/|Psi|) is bounded "
                      "(a case of the equivalence criterion)",
    "sing-cap-V-bounded": "Sing(Psi) cap V bounded implies cl(M(Psi)\\V) cap V bounded",
    "radial-homogeneous": "radial weighted homogeneity with Sing(Psi) contained in V implies M(Psi/|Psi|) "
                          "bounded (Euler-field argument)",
    "semi-tame-mixed": "a mixed f with S(f) contained in {0} and the critical-value condition on "
                       "Sing(f/|f|) has M(f/|f|) bounded",
    "g-hbar": "f = g conj(h) with g/h semi-tame has M(f/|f|) bounded, since f/|f| equals (g/h)/|g/h|",
    "face-criterion": "empty critical loci of f_D/|f_D| on the torus for every designated face D imply "
                      "M(f/|f|) bounded (external criterion; faces user-designated)",
}


class Status(str, enum.Enum):
    PROVED = "PROVED"
    PROVED_QUALIFIED = "PROVED_QUALIFIED"
    REFUTED = "REFUTED"
    UNKNOWN = "UNKNOWN"


@dataclass
class Evidence:
    """A tri-state value (True / False / None = unknown) with its provenance."""

    value: bool | None
    source: str
    params: dict = field(default_factory=dict)
    payload: Any = None
    qualified: bool = False
    note: str = ""

    def to_json(self):
        p = self.payload
        if hasattr(p, "to_json"):
            p = p.to_json()
        return {"value": self.value, "qualified": self.qualified, "source": self.source,
                "params": self.params, "note": self.note, "detail": _jsonable(p)}


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return str(obj)


def _from_bound(v: BoundednessVerdict, source: str, params: dict) -> Evidence:
    return Evidence(v.bounded, source, params, v, qualified=v.qualified, note=v.evidence)


@dataclass
class Options:
    wmax: int = DEFAULT_WMAX
    order: int = DEFAULT_ORDER
    starts: int = 32           # random starts per leading system
    seed: int = 0
    sing_starts: int = 64      # multistart samples of Sing(Psi)
    codim_starts: int = 64
    codim_R0: float = 1e3
    torus_starts: int = 512
    samples: int = 16          # leading solutions kept per direction in S(Psi) estimates
    faces: Tuple = ()          # designated faces: indices or point lists

    def search_params(self) -> dict:
        return {"wmax": self.wmax, "order": self.order, "starts": self.starts, "seed": self.seed}


@dataclass
class Problem:
    f: MixedPolynomial | RealPolyMap
    g: MixedPolynomial | None = None
    h: MixedPolynomial | None = None

    @property
    def mixed(self) -> bool:
        return isinstance(self.f, MixedPolynomial)


@dataclass
class ConditionReport:
    cond_i: Evidence
    cond_ii: Evidence
    sing_cap_V_bounded: Evidence
    sing_subset_V: Evidence
    semi_tame: Evidence
    star_condition: Evidence
    codim_ok: Evidence
    is_holomorphic: Evidence
    radial: Evidence
    polar: Evidence
    gh_bar_factorization: Evidence
    face_criterion: Evidence
    research_interesting: Evidence
    p: int
    m: int
    n_complex: int | None
    cond_ii_rules: Tuple[str, ...] = ()
    cond_i_rules: Tuple[str, ...] = ()
    options: dict = field(default_factory=dict)

    FIELDS = ("cond_i", "cond_ii", "sing_cap_V_bounded", "sing_subset_V", "semi_tame", "star_condition",
              "codim_ok", "is_holomorphic", "radial", "polar", "gh_bar_factorization", "face_criterion",
              "research_interesting")

    def to_json(self):
        out = {name: getattr(self, name).to_json() for name in self.FIELDS}
        out.update({"p": self.p, "m": self.m, "n_complex": self.n_complex,
                    "cond_i_rules": list(self.cond_i_rules), "cond_ii_rules": list(self.cond_ii_rules),
                    "options": self.options})
        return out


# ---------------------------------------------------------------------------
# Assembling the report
# ---------------------------------------------------------------------------


def _on_V(psi_sys: PolySystem, x: np.ndarray) -> bool:
    """Does a Levenberg-Marquardt step from x land on V close to x?"""
    if np.all(np.abs(psi_sys.values(x)[0]) <= 1e-13 * psi_sys.scales):
        return True
    y = psi_sys.refine(x, max_nfev=3000)
    close = np.linalg.norm(y - x) <= 1e-4 * (1.0 + np.linalg.norm(x))
    return bool(close and np.all(np.abs(psi_sys.values(y)[0]) <= 1e-12 * psi_sys.scales))


def _sing_subset_V(psi: RealPolyMap, sing: MilnorSystem, opts: Options) -> Evidence:
    params = {"starts": opts.sing_starts, "seed": opts.seed}
    src = "multistart sampling of Sing(Psi), each point projected onto V"
    if sing.is_whole_space():
        return Evidence(None, src, params, note="Sing(Psi) is the whole space")
    if sing.is_empty_exact():
        return Evidence(True, "exact: a Jacobian minor is a nonzero constant", params, note="Sing(Psi) is empty")
    pts = sample_points(sing, starts=opts.sing_starts, seed=opts.seed)
    psi_sys = PolySystem(psi.components)
    off = [x for x in pts if not _on_V(psi_sys, x)]
    if off:
        return Evidence(False, src, params, payload={"witness": [float(v) for v in off[0]], "off_V": len(off)},
                        note="a singular point off V was found")
    return Evidence(True, src, params, payload={"samples": len(pts)}, qualified=True,
                    note=f"all {len(pts)} sampled singular points lie on V" if pts
                    else "no singular point found")


def _sing_cap_V(psi: RealPolyMap, sing: MilnorSystem, opts: Options) -> Evidence:
    params = opts.search_params()
    if sing.is_whole_space():
        return Evidence(None, "boundedness of Sing(Psi) cap V", params, note="Sing(Psi) is the whole space")
    system = MilnorSystem(SystemKind.SING, psi.names, sing.generators + tuple(psi.components),
                          provenance="Jacobian minors together with the components (Sing(Psi) cap V)")
    v = boundedness(system, Constraint.NONE, opts.wmax, opts.order, psi=psi, complex_pairs=False,
                    seed=opts.seed, starts=opts.starts)
    return _from_bound(v, "boundedness of Sing(Psi) cap V", params)


def _codim(psi: RealPolyMap, opts: Options) -> Evidence:
    params = {"R0": opts.codim_R0, "starts": opts.codim_starts, "seed": opts.seed}
    r = codim_at_infinity(psi, R0=opts.codim_R0, starts=opts.codim_starts, seed=opts.seed)
    src = "codim_at_infinity"
    if r.status == "Confirmed":
        return Evidence(r.codim == psi.p, src, params, r)
    if r.status == "Violated":
        return Evidence(False, src, params, r, note=r.note)
    if r.samples == 0:
        return Evidence(True, src, params, r, qualified=True,
                        note="no point of V outside the ball was found; the condition is taken to hold vacuously")
    return Evidence(None, src, params, r, note=r.note)


def _semi_tame(f, opts: Options) -> Evidence:
    params = {"wmax": opts.wmax, "order": opts.order, "samples": opts.samples, "seed": opts.seed}
    S = estimate_S(f, wmax=opts.wmax, K=opts.order, samples=opts.samples, seed=opts.seed, starts=2 * opts.starts)
    if S.semi_tame:
        return Evidence(True, "estimate_S", params, S, qualified=True,
                        note="no nonzero asymptotic value found" if S.limits else "no asymptotic value found")
    nz = S.nonzero_limits()
    note = f"S(Psi) contains nonzero values ({S.kind}"
    if S.kind == "circle":
        note += f", radius {S.radius:.6g}"
    note += ")"
    return Evidence(False, "estimate_S", params, S, note=note)


def _star(f: MixedPolynomial, psi: RealPolyMap, sing_subset: Evidence, opts: Options) -> Evidence:
    if f.is_holomorphic():
        return Evidence(True, "holomorphic input", {}, note="critical values of a polynomial are finite, so "
                        "the critical-value condition holds")
    if sing_subset.value is True:
        return Evidence(True, "Sing(f) contained in V", sing_subset.params, qualified=sing_subset.qualified,
                        note="Sing(f/|f|) lies in Sing(f) off V, hence is empty")
    params = {**opts.search_params(), "sing_starts": opts.sing_starts}
    om = omega_matrix(psi)
    crit = MilnorSystem(SystemKind.SING, psi.names, tuple(e for e in om.rows[0] if not e.is_zero()),
                        excluded_locus=tuple(psi.components), provenance="omega_12 = 0 (critical points of f/|f|)")
    if crit.is_whole_space():
        return Evidence(None, "Sing(f/|f|) sampling", params, note="Sing(f/|f|) is everything")
    reach = boundedness(crit, Constraint.EXCLUDE_V, opts.wmax, opts.order, psi=psi, complex_pairs=True,
                        seed=opts.seed, starts=opts.starts)
    if reach.bounded is not True:
        return Evidence(None, "Sing(f/|f|) sampling", params, reach,
                        note="Sing(f/|f|) may reach infinity; the condition is left undecided")
    psi_sys = PolySystem(psi.components)
    pts = [x for x in sample_points(crit, starts=opts.sing_starts, seed=opts.seed) if not _on_V(psi_sys, x)]
    if not pts:
        return Evidence(True, "Sing(f/|f|) sampling", params, reach, qualified=True,
                        note="no critical point of f/|f| off V found")
    images = np.array([psi_sys.values(x)[0] for x in pts])
    r = 1e-6 * max(1.0, float(np.max(np.linalg.norm(images, axis=1))))
    reps = cluster_points(list(images), r)
    gap = min(float(np.linalg.norm(c)) for c in reps)
    ok = gap >= 10 * r
    return Evidence(True if ok else None, "Sing(f/|f|) sampling", params,
                    {"image_clusters": [list(map(float, c)) for c in reps], "gap": gap}, qualified=True,
                    note="0 is isolated among the sampled critical values" if ok
                    else "critical values accumulate at 0 within the gap test")


def _gh(problem: Problem, opts: Options) -> Evidence:
    if problem.g is None or problem.h is None:
        return Evidence(None, "user declaration", {}, note="no factorization declared")
    g, h = problem.g, problem.h
    params = {"wmax": opts.wmax, "order": opts.order, "seed": opts.seed}
    if not (g.is_holomorphic() and h.is_holomorphic()):
        return Evidence(False, "exact check", params, note="declared g and h must be holomorphic")
    if conj_product(g, h) != problem.f:
        return Evidence(False, "exact check", params, note="f != g * conj(h)")
    S = estimate_S_quotient(g, h, wmax=opts.wmax, K=opts.order, samples=opts.samples, seed=opts.seed,
                            starts=2 * opts.starts)
    if S.semi_tame:
        return Evidence(True, "exact check f = g conj(h); estimate of S(g/h)", params, S, qualified=True,
                        note="g/h has no nonzero asymptotic value in the search")
    return Evidence(None, "exact check f = g conj(h); estimate of S(g/h)", params, S,
                    note="g/h has nonzero asymptotic values")


def _faces(f, opts: Options) -> Evidence:
    if not opts.faces:
        return Evidence(None, "face designation", {}, note="no face designated")
    if not isinstance(f, MixedPolynomial):
        return Evidence(None, "face designation", {}, note="faces apply to mixed inputs only")
    P = newton_polyhedron(f)
    params = {"faces": _jsonable(list(opts.faces)), "starts": opts.torus_starts, "seed": opts.seed}
    results = []
    for spec in opts.faces:
        face = P.faces[spec] if isinstance(spec, int) else P.face_with_points(spec)
        fd = face_polynomial(f, face)
        res = quotient_critical_on_torus(fd, starts=opts.torus_starts, seed=opts.seed)
        results.append({"face": face.index, "points": [list(q) for q in face.points],
                        "face_polynomial": fd.to_str(), "search": res.to_json()})
        if not res.empty:
            return Evidence(None, "torus search on designated faces", params, results,
                            note=f"face {face.index} has a torus critical point")
    return Evidence(True, "torus search on designated faces", params, results, qualified=True,
                    note="no torus critical point on any designated face")


def assemble_conditions(problem, options: Options | None = None) -> ConditionReport:
    """Check every condition the rules consume; failures become Unknown with a reason."""
    opts = options or Options()
    if not isinstance(problem, Problem):
        problem = Problem(problem)
    f = problem.f
    psi = as_map(f)
    mixed = problem.mixed

    def guarded(name, fn, *args):
        try:
            return fn(*args)
        except Exception as exc:  # surfaced, never silent
            log.warning("%s failed: %s", name, exc)
            return Evidence(None, name, {}, note=f"error: {type(exc).__name__}: {exc}")

    holo = Evidence(bool(mixed and f.is_holomorphic()), "exact support check" if mixed else "real map input")

    def radial_ev():
        cert = detect_radial(f)
        return Evidence(cert is not None, "integer program on exponents, verified exactly", {}, cert)

    def polar_ev():
        if not mixed:
            return Evidence(False, "polar weights need a mixed input", {})
        cert = detect_polar(f)
        return Evidence(cert is not None, "integer program on exponents, verified exactly", {}, cert)

    radial = guarded("radial", radial_ev)
    polar = guarded("polar", polar_ev)
    sing = sing_system(psi)
    sing_subset = guarded("sing_subset_V", _sing_subset_V, psi, sing, opts)
    sing_cap = guarded("sing_cap_V_bounded", _sing_cap_V, psi, sing, opts)
    codim = guarded("codim_ok", _codim, psi, opts)
    semi = guarded("semi_tame", _semi_tame, f, opts)
    if mixed:
        star = guarded("star_condition", _star, f, psi, sing_subset, opts)
    else:
        star = Evidence(None, "critical-value condition", {}, note="defined for mixed inputs only")
    gh = guarded("gh_bar_factorization", _gh, problem, opts) if mixed else \
        Evidence(None, "user declaration", {}, note="mixed inputs only")
    faces = guarded("face_criterion", _faces, f, opts)

    params = opts.search_params()

    # closure condition (i)
    cond_i_rules: Tuple[str, ...] = ()
    if sing_cap.value is True:
        bv = sing_cap.payload
        exact = isinstance(bv, BoundednessVerdict) and bv.status in (BoundStatus.EMPTY, BoundStatus.BOUNDED_CERT)
        cert = Certificate("sing-cap-V-bounded", CITATIONS["sing-cap-V-bounded"],
                           (f"Sing(Psi) cap V bounded: {bv.status.value if bv else 'yes'}",))
        v = BoundednessVerdict(BoundStatus.BOUNDED_CERT if exact else BoundStatus.BOUNDED_SEARCH,
                               "implied by boundedness of Sing(Psi) cap V", milnor_system(psi), Constraint.INTERSECT_V,
                               wmax=None if exact else opts.wmax, order=None if exact else opts.order,
                               certificate=cert)
        cond_i = _from_bound(v, "sing-cap-V-bounded lemma", params)
        cond_i_rules = ("sing-cap-V-bounded",)
    else:
        def direct():
            v = boundedness(milnor_system(psi), Constraint.INTERSECT_V, opts.wmax, opts.order, psi=psi,
                            complex_pairs=mixed, seed=opts.seed, starts=opts.starts)
            return _from_bound(v, "arc search on M(Psi) with Psi -> 0", params)
        cond_i = guarded("cond_i", direct)

    # condition (ii)
    quotient = milnor_quotient_system(psi) if psi.p >= 2 else None
    cond_ii_rules: List[str] = []
    if radial.value and sing_subset.value is True:
        rc = radial.payload
        hyp = (f"radial weights {list(rc.weights)}, degree {rc.degree} (exact)",
               f"Sing(Psi) contained in V: {sing_subset.note}")
        cert = Certificate("radial-homogeneous", CITATIONS["radial-homogeneous"], hyp)
        v = boundedness(quotient, Constraint.EXCLUDE_V, certificates=[cert], psi=psi)
        cond_ii = _from_bound(v, "radial-homogeneous", {})
        cond_ii_rules.append("radial-homogeneous")
    elif quotient is None:
        cond_ii = Evidence(None, "M(Psi/|Psi|)", {}, note="needs p >= 2")
    else:
        def search():
            return boundedness(quotient, Constraint.EXCLUDE_V, opts.wmax, opts.order, psi=psi,
                               complex_pairs=mixed, seed=opts.seed, starts=opts.starts)
        try:
            sv = search()
        except Exception as exc:
            log.warning("cond_ii search failed: %s", exc)
            sv = BoundednessVerdict(BoundStatus.UNKNOWN, f"error: {exc}", quotient, Constraint.EXCLUDE_V)
        subs = []
        if mixed and semi.value is True and star.value is True:
            subs.append("semi-tame-mixed")
        if gh.value is True:
            subs.append("g-hbar")
        if faces.value is True:
            subs.append("face-criterion")
        if sv.status is BoundStatus.UNBOUNDED:
            note = sv.evidence
            if subs:
                note += "; conflicts with " + ", ".join(subs) + " (their search-based hypotheses are suspect)"
            cond_ii = Evidence(False, "arc search on M(Psi/|Psi|) off V", params, sv, note=note)
        elif subs:
            cert = Certificate(subs[0], CITATIONS[subs[0]], tuple(f"{s}: hypotheses checked" for s in subs))
            v = BoundednessVerdict(BoundStatus.BOUNDED_SEARCH, "; ".join(CITATIONS[s] for s in subs), quotient,
                                   Constraint.EXCLUDE_V, wmax=opts.wmax, order=opts.order, certificate=cert,
                                   stats={"arc_search": sv.status.value, **sv.stats})
            cond_ii = _from_bound(v, ", ".join(subs), params)
            cond_ii_rules.extend(subs)
        else:
            cond_ii = _from_bound(sv, "arc search on M(Psi/|Psi|) off V", params)

    # unbounded branches of Sing(Psi) off V
    def research():
        if sing.is_whole_space():
            return Evidence(None, "arc search on Sing(Psi) off V", params, note="Sing(Psi) is the whole space")
        v = boundedness(sing, Constraint.EXCLUDE_V, opts.wmax, opts.order, psi=psi, complex_pairs=mixed,
                        seed=opts.seed, starts=opts.starts)
        flag = None if v.bounded is None else not v.bounded
        return Evidence(flag, "arc search on Sing(Psi) off V", params, v,
                        note="Sing(Psi) has an unbounded branch off V" if flag else "")
    research_ev = guarded("research_interesting", research)

    return ConditionReport(cond_i=cond_i, cond_ii=cond_ii, sing_cap_V_bounded=sing_cap, sing_subset_V=sing_subset,
                           semi_tame=semi, star_condition=star, codim_ok=codim, is_holomorphic=holo,
                           radial=radial, polar=polar, gh_bar_factorization=gh, face_criterion=faces,
                           research_interesting=research_ev, p=psi.p, m=psi.m,
                           n_complex=f.n if mixed else None, cond_ii_rules=tuple(cond_ii_rules),
                           cond_i_rules=cond_i_rules,
                           options={**params, "sing_starts": opts.sing_starts, "codim_starts": opts.codim_starts,
                                    "codim_R0": opts.codim_R0, "torus_starts": opts.torus_starts,
                                    "samples": opts.samples, "faces": _jsonable(list(opts.faces))})


# ---------------------------------------------------------------------------
# Verdict
# ---------------------------------------------------------------------------


@dataclass
class OpenBookVerdict:
    status: Status
    binding: str                      # "singular" | "smooth" | "n/a"
    chain: List[dict]
    report: ConditionReport
    qualified: dict | bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def rules(self) -> List[str]:
        return [c["rule"] for c in self.chain]

    def to_json(self):
        return {"schema": SCHEMA, "status": self.status.value, "binding": self.binding,
                "qualified": self.qualified, "chain": self.chain, "notes": self.notes,
                "report": self.report.to_json()}

    def exit_code(self) -> int:
        return {Status.PROVED: 0, Status.PROVED_QUALIFIED: 0, Status.REFUTED: 1, Status.UNKNOWN: 2}[self.status]


def _hyp(name: str, ev: Evidence) -> dict:
    return {"name": name, "value": ev.value, "qualified": ev.qualified, "source": ev.source}


def _entry(rule: str, hyps: Sequence[Tuple[str, Evidence]], based_on: Sequence[str] = ()) -> dict:
    out = {"rule": rule, "citation": CITATIONS[rule], "hypotheses": [_hyp(n, e) for n, e in hyps]}
    if based_on:
        out["based_on"] = list(based_on)
    return out


def _sub_entries(r: ConditionReport, include_i: bool) -> List[dict]:
    out = []
    if include_i and "sing-cap-V-bounded" in r.cond_i_rules:
        out.append(_entry("sing-cap-V-bounded", [("sing_cap_V_bounded", r.sing_cap_V_bounded)]))
    for rule in r.cond_ii_rules:
        hyps = {
            "radial-homogeneous": [("radial", r.radial), ("sing_subset_V", r.sing_subset_V)],
            "semi-tame-mixed": [("semi_tame", r.semi_tame), ("star_condition", r.star_condition)],
            "g-hbar": [("gh_bar_factorization", r.gh_bar_factorization)],
            "face-criterion": [("face_criterion", r.face_criterion)],
        }[rule]
        out.append(_entry(rule, hyps))
    return out


def _qualifier(r: ConditionReport, used: Sequence[Evidence]):
    if any(e.qualified for e in used):
        return {"wmax": r.options.get("wmax"), "order": r.options.get("order"), "seed": r.options.get("seed")}
    return False


def verdict(report: ConditionReport) -> OpenBookVerdict:
    r = report
    notes = []
    if r.research_interesting.value:
        notes.append("Sing(Psi) has an unbounded branch off V")

    def done(status, binding, chain, used, extra=()):
        q = _qualifier(r, used)
        if status is Status.PROVED and q:
            status = Status.PROVED_QUALIFIED
        return OpenBookVerdict(status, binding, chain, r, q, notes + list(extra))

    polar = r.polar.payload
    # smooth-binding goes first: it pins down the binding type, which the other rules leave open
    if r.codim_ok.value is True and r.sing_cap_V_bounded.value is True:
        hyps = [("codim_ok", r.codim_ok), ("sing_cap_V_bounded", r.sing_cap_V_bounded), ("cond_ii", r.cond_ii)]
        chain = _sub_entries(r, include_i=False) + [_entry("smooth-binding", hyps, based_on=["equivalence"])]
        if r.cond_ii.value is True:
            if r.polar.value and polar.all_nonzero and (r.n_complex or 0) >= 2:
                notes.append("polar-homogeneous also applies (singular binding in the wider sense)")
            return done(Status.PROVED, "smooth", chain, [r.codim_ok, r.sing_cap_V_bounded, r.cond_ii])
        if r.cond_ii.value is False and r.cond_ii.payload is not None and r.cond_ii.payload.witness is not None:
            return done(Status.REFUTED, "n/a", chain, [])

    if r.polar.value and polar.all_nonzero and r.codim_ok.value is True and (r.n_complex or 0) >= 2:
        extra = [] if r.is_holomorphic.value else [THOM_NOTE]
        return done(Status.PROVED, "singular",
                    [_entry("polar-homogeneous", [("polar", r.polar), ("codim_ok", r.codim_ok)])],
                    [r.polar, r.codim_ok], extra)

    if r.is_holomorphic.value and (r.n_complex or 0) >= 2 and r.semi_tame.value is True:
        return done(Status.PROVED, "singular",
                    [_entry("semi-tame-holomorphic", [("is_holomorphic", r.is_holomorphic),
                                                      ("semi_tame", r.semi_tame)])],
                    [r.is_holomorphic, r.semi_tame])

    if r.codim_ok.value is True and r.cond_i.value is True:
        hyps = [("codim_ok", r.codim_ok), ("cond_i", r.cond_i), ("cond_ii", r.cond_ii)]
        chain = _sub_entries(r, include_i=True) + [_entry("equivalence", hyps)]
        if r.cond_ii.value is True:
            return done(Status.PROVED, "singular", chain, [r.codim_ok, r.cond_i, r.cond_ii])
        if r.cond_ii.value is False and r.cond_ii.payload is not None and r.cond_ii.payload.witness is not None:
            return done(Status.REFUTED, "n/a", chain, [])

    missing = [name for name, ev in (("codim_ok", r.codim_ok), ("cond_i", r.cond_i), ("cond_ii", r.cond_ii))
               if ev.value is not True]
    return OpenBookVerdict(Status.UNKNOWN, "n/a", [], r, False,
                           notes + [f"no rule fired; undecided or unfavorable: {', '.join(missing) or 'none'}"])


def check(problem, options: Options | None = None) -> OpenBookVerdict:
    return verdict(assemble_conditions(problem, options))
