import json

import pytest
from hypothesis import given, settings, strategies as st

from openbook.cli import JobError, JobSpec, compare, default_corpus, main, read_expected


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


names = st.text("abcxyz", min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(["mixed", "real_map"]), seed=st.integers(0, 10 ** 6),
       wmax=st.integers(1, 9), radii=st.lists(st.floats(1, 1e6), min_size=1, max_size=4),
       vars=st.lists(names, max_size=3))
def test_jobspec_round_trip(kind, seed, wmax, radii, vars):
    job = JobSpec(kind=kind, f="z1", seed=seed, wmax=wmax, radii=tuple(radii), vars=",".join(vars))
    again = JobSpec.from_text(job.to_text())
    assert again == job


def test_jobspec_rejects_unknown_key():
    with pytest.raises(JobError, match="unknown key"):
        JobSpec.from_text("f = z1\ncolour = red\n")


def test_jobspec_rejects_bad_integer():
    with pytest.raises(JobError):
        JobSpec.from_text("f = z1\nseed = many\n")


def test_gh_pair_needs_both_factors():
    with pytest.raises(JobError):
        JobSpec.from_text("kind = gh_pair\ng = z1\n")


def test_gh_pair_shares_variables():
    p = JobSpec.from_text("kind = gh_pair\ng = z1*z2\nh = z1\n").problem()
    assert p.g.n == p.h.n == p.f.n == 2


def test_face_designations():
    job = JobSpec(f="z1", faces="3; (1,2) (2,4)")
    assert job.face_designations() == (3, ((1, 2), (2, 4)))


def test_parse_error_exit_code_and_caret(capsys):
    code, _, err = run(capsys, "milnor", "--f", "z1*z2 + conj(z1")
    assert code == 3
    lines = err.splitlines()
    assert lines[-1].strip() == "^"


def test_missing_job_file_is_error(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.job"))
    assert code == 3 and "error" in err


def test_quotient_system_of_linear_form(capsys):
    code, out, _ = run(capsys, "milnor", "--f", "z1", "--quotient")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "1"
    assert data["generators"] == ["-x1^2 - x2^2"] or len(data["generators"]) == 1


def test_zero_system(capsys):
    code, out, _ = run(capsys, "milnor", "--f", "z1*z2", "--zero")
    assert code == 0 and len(json.loads(out)["generators"]) == 2


def test_newton_support(capsys):
    code, out, _ = run(capsys, "newton", "--f", "z1*conj(z1) + z2")
    assert code == 0
    assert "support" in json.loads(out)


def test_newton_needs_mixed_input(capsys):
    code, _, _ = run(capsys, "newton", "--kind", "real_map", "--f", "x; y")
    assert code == 3


def test_sweep_csv(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--f", "z1", "--radii", "10,100", "--csv", str(target))
    assert code == 0
    assert out.splitlines()[0] == "R,count,min_residual,min_dist_to_V"
    assert target.read_text() == out


def test_check_exit_code_and_json(capsys, tmp_path):
    target = tmp_path / "v.json"
    code, out, _ = run(capsys, "check", "--f", "z1", "--starts", "8", "--json", str(target))
    data = json.loads(out)
    assert code == 0 and data["exit_code"] == 0
    assert json.loads(target.read_text())["status"] == data["status"] == "PROVED_QUALIFIED"


def test_check_refuted_exit_code(capsys, tmp_path):
    job = tmp_path / "real.job"
    job.write_text("kind = real_map\nvars = x,y,z\nf = y*(2*x^2*y^2-9*x*y+12); z\n")
    code, out, _ = run(capsys, "check", str(job))
    assert code == 1 and json.loads(out)["status"] == "REFUTED"


def test_check_is_deterministic(capsys):
    _, a, _ = run(capsys, "check", "--f", "z1*conj(z1)*z2", "--starts", "8")
    _, b, _ = run(capsys, "check", "--f", "z1*conj(z1)*z2", "--starts", "8")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k not in ("timestamp", "elapsed_s")}
    assert strip(a) == strip(b)


def test_compare_expected(tmp_path):
    exp = tmp_path / "e.expected"
    exp.write_text("status = PROVED | PROVED_QUALIFIED\nbinding = smooth\nreport.cond_ii = True\n")
    result = {"status": "PROVED", "binding": "smooth", "chain": [],
              "report": {"cond_ii": {"value": True}}}
    assert compare(result, read_expected(exp)) == []
    result["binding"] = "singular"
    assert compare(result, read_expected(exp))


def test_shipped_corpus_is_complete():
    corpus = default_corpus()
    jobs = sorted(p.stem for p in corpus.glob("*.job"))
    assert len(jobs) >= 8
    for stem in jobs:
        assert (corpus / f"{stem}.expected").exists()
        JobSpec.load(corpus / f"{stem}.job")


@pytest.mark.slow
def test_shipped_corpus_passes(capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == 0, out
