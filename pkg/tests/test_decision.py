import json

import pytest
from hypothesis import given, settings, strategies as st

from openbook.algebra import Arc
from openbook.asymptotics import BoundednessVerdict, BoundStatus
from openbook.decision import (CITATIONS, ConditionReport, Evidence, Options, Problem, Status, check,
                               verdict)
from openbook.structure import PolarCertificate

from conftest import EX_ABS2, EX_RADIAL, mixed

TRI = st.sampled_from([True, False, None])


def ev(value, qualified=False, payload=None):
    return Evidence(value, "test", payload=payload, qualified=qualified)


def witness_bound():
    arc = Arc((1, -1), ((1.0,), (1.0,)))
    return BoundednessVerdict(BoundStatus.UNBOUNDED, "test arc", None, witness=arc)


def report(n=2, polar=None, **values):
    fields = {name: ev(None) for name in ConditionReport.FIELDS}
    fields["research_interesting"] = ev(False)
    fields["polar"] = ev(polar is not None, payload=polar)
    for k, v in values.items():
        fields[k] = v if isinstance(v, Evidence) else ev(v)
    return ConditionReport(p=2, m=2 * n, n_complex=n, options={"wmax": 4, "order": 6, "seed": 0}, **fields)


def test_nothing_known_is_unknown():
    v = verdict(report())
    assert v.status is Status.UNKNOWN and v.chain == [] and v.exit_code() == 2


def test_equivalence_rule_fires():
    v = verdict(report(codim_ok=True, cond_i=True, cond_ii=True))
    assert v.status is Status.PROVED and v.binding == "singular"
    assert v.rules[-1] == "equivalence"


def test_smooth_binding_rule_cites_equivalence():
    v = verdict(report(codim_ok=True, sing_cap_V_bounded=True, cond_ii=True))
    assert v.binding == "smooth"
    assert v.chain[-1]["based_on"] == ["equivalence"]


def test_qualified_evidence_qualifies_verdict():
    v = verdict(report(codim_ok=True, cond_i=True, cond_ii=ev(True, qualified=True)))
    assert v.status is Status.PROVED_QUALIFIED
    assert v.qualified["wmax"] == 4


def test_refutation_needs_witness():
    no_witness = verdict(report(codim_ok=True, cond_i=True, cond_ii=False))
    assert no_witness.status is Status.UNKNOWN
    with_witness = verdict(report(codim_ok=True, cond_i=True, cond_ii=ev(False, payload=witness_bound())))
    assert with_witness.status is Status.REFUTED and with_witness.exit_code() == 1


def test_polar_rule_needs_two_variables_and_nonzero_weights():
    good = PolarCertificate((1, 1), 2)
    assert verdict(report(polar=good, codim_ok=True)).rules == ["polar-homogeneous"]
    assert verdict(report(n=1, polar=PolarCertificate((1,), 2), codim_ok=True)).status is Status.UNKNOWN
    assert verdict(report(polar=PolarCertificate((0, 1), 1), codim_ok=True)).status is Status.UNKNOWN


def test_polar_non_holomorphic_carries_thom_note():
    v = verdict(report(polar=PolarCertificate((1, 1), 2), codim_ok=True, is_holomorphic=False))
    assert any("Thom" in n for n in v.notes)


def test_semi_tame_holomorphic_rule():
    v = verdict(report(is_holomorphic=True, semi_tame=True))
    assert v.rules == ["semi-tame-holomorphic"]
    assert verdict(report(n=1, is_holomorphic=True, semi_tame=True)).status is Status.UNKNOWN


def test_every_rule_has_a_citation():
    for rule in ("equivalence", "smooth-binding", "polar-homogeneous", "semi-tame-holomorphic",
                 "radial-homogeneous", "semi-tame-mixed", "g-hbar", "face-criterion", "sing-cap-V-bounded"):
        assert CITATIONS[rule]


def _fired_rule_holds(r, v):
    rule = v.rules[-1]
    if rule == "smooth-binding":
        return r.codim_ok.value and r.sing_cap_V_bounded.value and r.cond_ii.value
    if rule == "equivalence":
        return r.codim_ok.value and r.cond_i.value and r.cond_ii.value
    if rule == "polar-homogeneous":
        return r.polar.value and r.codim_ok.value and r.n_complex >= 2
    if rule == "semi-tame-holomorphic":
        return r.is_holomorphic.value and r.semi_tame.value and r.n_complex >= 2
    return False


tri_reports = st.builds(
    lambda ci, cii, cap, codim, holo, tame, pol, n, q: report(
        n=n, polar=PolarCertificate((1,) * n, 2) if pol else None, cond_i=ci, cond_ii=ev(cii, qualified=q),
        sing_cap_V_bounded=cap, codim_ok=codim, is_holomorphic=holo, semi_tame=tame),
    TRI, TRI, TRI, TRI, TRI, TRI, st.booleans(), st.integers(1, 3), st.booleans())


@settings(max_examples=300, deadline=None)
@given(tri_reports)
def test_proved_only_when_a_rule_holds(r):
    v = verdict(r)
    if v.status in (Status.PROVED, Status.PROVED_QUALIFIED):
        assert _fired_rule_holds(r, v)
    else:
        assert v.chain == [] or v.status is Status.REFUTED


@settings(max_examples=300, deadline=None)
@given(tri_reports)
def test_resolving_unknowns_favorably_keeps_a_proof(r):
    before = verdict(r).status
    for name in ConditionReport.FIELDS:
        e = getattr(r, name)
        if e.value is None:
            setattr(r, name, ev(True))
    after = verdict(r).status
    if before in (Status.PROVED, Status.PROVED_QUALIFIED):
        assert after in (Status.PROVED, Status.PROVED_QUALIFIED)


@settings(max_examples=200, deadline=None)
@given(tri_reports)
def test_no_refutation_without_witness(r):
    v = verdict(r)
    assert v.status is not Status.REFUTED


def test_verdict_json_is_serializable():
    v = verdict(report(codim_ok=True, cond_i=True, cond_ii=True))
    j = json.loads(json.dumps(v.to_json()))
    assert j["schema"] == "1" and j["status"] == "PROVED"
    assert set(ConditionReport.FIELDS) <= set(j["report"])


def test_linear_form_end_to_end():
    v = check(Problem(mixed("z1")), Options(starts=8))
    assert v.status is Status.PROVED_QUALIFIED and v.binding == "smooth"


def test_abs_square_polar_end_to_end():
    v = check(Problem(mixed(EX_ABS2)), Options(starts=8))
    assert v.status in (Status.PROVED, Status.PROVED_QUALIFIED)
    assert "polar-homogeneous" in v.rules


@pytest.mark.slow
def test_radial_example_end_to_end():
    v = check(Problem(mixed(EX_RADIAL)))
    assert v.status in (Status.PROVED, Status.PROVED_QUALIFIED)
    assert "radial-homogeneous" in v.rules
