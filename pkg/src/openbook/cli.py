"""Command line: check, milnor, newton, sweep, corpus.

Jobs are plain ``key = value`` files::

    # mixed version of Broughton's example
    kind = mixed
    f = z1*(1+conj(z1)*z2)
    seed = 0

Flags given on the command line override values from the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .algebra import MixedPolynomial, ParseError, conj_product, parse_mixed, parse_real_map, realify
from .asymptotics import radius_sweep
from .decision import SCHEMA, Options, Problem, assemble_conditions, verdict
from .milnor import milnor_quotient_system, milnor_system, sing_system, zero_system
from .structure import as_map, newton_polyhedron

log = logging.getLogger("openbook")

EXIT_ERROR = 3
KINDS = ("mixed", "real_map", "gh_pair")


class JobError(ValueError):
    pass


@dataclass
class JobSpec:
    kind: str = "mixed"
    f: str = ""
    g: str = ""
    h: str = ""
    vars: str = ""
    seed: int = 0
    wmax: int = 4
    order: int = 6
    starts: int = 32
    sing_starts: int = 64
    codim_starts: int = 64
    torus_starts: int = 512
    samples: int = 16
    radii: Tuple[float, ...] = (10.0, 100.0, 1000.0)
    sweep_starts: int = 128
    faces: str = ""
    json: str = ""
    csv: str = ""
    name: str = ""

    _INT = ("seed", "wmax", "order", "starts", "sing_starts", "codim_starts", "torus_starts", "samples",
            "sweep_starts")

    @classmethod
    def from_text(cls, text: str, name: str = "") -> "JobSpec":
        job = cls(name=name)
        known = {f.name for f in fields(cls)}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise JobError(f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise JobError(f"line {lineno}: unknown key '{key}'")
            job.set(key, value)
        job.validate()
        return job

    @classmethod
    def load(cls, path) -> "JobSpec":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), name=path.stem)

    def set(self, key: str, value):
        if value is None:
            return
        if key in self._INT:
            try:
                value = int(value)
            except ValueError:
                raise JobError(f"{key} must be an integer, got {value!r}") from None
        elif key == "radii":
            if isinstance(value, str):
                try:
                    value = tuple(float(v) for v in value.replace(",", " ").split())
                except ValueError:
                    raise JobError(f"radii must be numbers, got {value!r}") from None
            value = tuple(float(v) for v in value)
        setattr(self, key, value)

    def validate(self):
        if self.kind not in KINDS:
            raise JobError(f"kind must be one of {', '.join(KINDS)}")
        if self.kind == "gh_pair":
            if not (self.g and self.h):
                raise JobError("gh_pair jobs need g and h")
        elif not self.f:
            raise JobError("missing f")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            if f.name == "name":
                continue
            v = getattr(self, f.name)
            if f.name == "radii":
                v = ", ".join(repr(r) for r in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    # -- parsed objects --

    def names(self) -> List[str] | None:
        return [s for s in self.vars.replace(",", " ").split()] or None

    def problem(self) -> Problem:
        names = self.names()
        if self.kind == "real_map":
            return Problem(parse_real_map(self.f, names))
        if self.kind == "mixed":
            return Problem(parse_mixed(self.f, names))
        if names is None:
            # g and h must live in the same space
            import re
            k = max((int(s) for s in re.findall(r"\bz(\d+)\b", self.g + " " + self.h + " " + self.f)), default=1)
            names = [f"z{j + 1}" for j in range(k)]
        g, h = parse_mixed(self.g, names), parse_mixed(self.h, names)
        f = parse_mixed(self.f, names) if self.f else conj_product(g, h)
        return Problem(f, g, h)

    def face_designations(self) -> Tuple:
        out = []
        for item in self.faces.split(";"):
            item = item.strip()
            if not item:
                continue
            if item.isdigit():
                out.append(int(item))
                continue
            pts = []
            for chunk in item.replace(" ", "").split(")"):
                chunk = chunk.strip("(,")
                if chunk:
                    pts.append(tuple(int(v) for v in chunk.split(",")))
            out.append(tuple(pts))
        return tuple(out)

    def options(self) -> Options:
        return Options(wmax=self.wmax, order=self.order, starts=self.starts, seed=self.seed,
                       sing_starts=self.sing_starts, codim_starts=self.codim_starts,
                       torus_starts=self.torus_starts, samples=self.samples, faces=self.face_designations())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _emit(obj, job: JobSpec, out=None):
    text = json.dumps(obj, indent=2, sort_keys=False)
    if job.json:
        Path(job.json).write_text(text + "\n", encoding="utf-8")
    print(text, file=out or sys.stdout)


def run_check(job: JobSpec) -> dict:
    started = time.time()
    v = verdict(assemble_conditions(job.problem(), job.options()))
    out = v.to_json()
    out["job"] = job.name
    out["exit_code"] = v.exit_code()
    out["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    out["elapsed_s"] = round(time.time() - started, 3)
    return out


def cmd_check(job: JobSpec) -> int:
    out = run_check(job)
    _emit(out, job)
    return out["exit_code"]


def cmd_milnor(job: JobSpec, which: str) -> int:
    psi = as_map(job.problem().f)
    builders = {"sing": sing_system, "milnor": milnor_system, "quotient": milnor_quotient_system,
                "zero": zero_system}
    system = builders[which](psi)
    _emit({"schema": SCHEMA, "job": job.name, **system.to_json()}, job)
    return 0


def cmd_newton(job: JobSpec) -> int:
    f = job.problem().f
    if not isinstance(f, MixedPolynomial):
        raise JobError("newton needs a mixed input")
    _emit({"schema": SCHEMA, "job": job.name, **newton_polyhedron(f).to_json()}, job)
    return 0


def cmd_sweep(job: JobSpec) -> int:
    f = job.problem().f
    report = radius_sweep(f, radii=job.radii, starts=job.sweep_starts, seed=job.seed)
    csv_text = report.to_csv()
    if job.csv:
        Path(job.csv).write_text(csv_text, encoding="utf-8")
    if job.json:
        Path(job.json).write_text(json.dumps({"schema": SCHEMA, "job": job.name, **report.to_json()}, indent=2)
                                  + "\n", encoding="utf-8")
    sys.stdout.write(csv_text)
    return 0


def default_corpus() -> Path:
    return Path(str(resources.files("openbook") / "corpus"))


def read_expected(path: Path) -> Dict[str, str]:
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#") and "=" in line:
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
    return out


def compare(result: dict, expected: Dict[str, str]) -> List[str]:
    """Mismatches between a check result and an expected-verdict file."""
    bad = []
    if "status" in expected:
        allowed = [s.strip() for s in expected["status"].split("|")]
        if result["status"] not in allowed:
            bad.append(f"status {result['status']} not in {allowed}")
    if "binding" in expected and result["binding"] != expected["binding"]:
        bad.append(f"binding {result['binding']} != {expected['binding']}")
    if "rule" in expected:
        rules = [c["rule"] for c in result["chain"]]
        if expected["rule"] not in rules:
            bad.append(f"rule {expected['rule']} not in chain {rules}")
    for key, value in expected.items():
        if key.startswith("report."):
            name = key.split(".", 1)[1]
            got = result["report"][name]["value"]
            if str(got) != value:
                bad.append(f"{key} = {got} != {value}")
    return bad


def _corpus_job(path: str, overrides: dict):
    job = JobSpec.load(path)
    for k, v in overrides.items():
        job.set(k, v)
    job.json = ""
    return run_check(job)


def cmd_corpus(directory, overrides: dict, jobs: int = 1, out=None) -> int:
    directory = Path(directory)
    paths = sorted(directory.glob("*.job"))
    if not paths:
        raise JobError(f"no .job files in {directory}")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_corpus_job, [str(p) for p in paths], [overrides] * len(paths)))
    else:
        results = [_corpus_job(str(p), overrides) for p in paths]
    failures = 0
    summary = []
    for path, res in zip(paths, results):
        exp_path = path.with_suffix(".expected")
        bad = compare(res, read_expected(exp_path)) if exp_path.exists() else ["no expected file"]
        failures += bool(bad)
        summary.append({"job": path.stem, "status": res["status"], "binding": res["binding"],
                        "ok": not bad, "problems": bad})
        print(f"{'ok  ' if not bad else 'FAIL'} {path.stem}: {res['status']} {res['binding']}"
              + ("" if not bad else "  (" + "; ".join(bad) + ")"), file=out or sys.stdout)
    if overrides.get("json"):
        Path(overrides["json"]).write_text(json.dumps({"schema": SCHEMA, "jobs": summary}, indent=2) + "\n",
                                           encoding="utf-8")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _job_from_args(args) -> JobSpec:
    if args.job:
        job = JobSpec.load(args.job)
    else:
        job = JobSpec(name="inline")
    if args.kind:
        job.kind = args.kind
    for key in ("f", "g", "h", "vars", "faces"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(job, key, v)
    for key in ("seed", "wmax", "order", "starts", "radii", "json", "csv"):
        v = getattr(args, key, None)
        if v is not None:
            job.set(key, v)
    job.validate()
    return job


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--wmax", type=int, help="largest leading exponent searched")
    common.add_argument("--order", type=int, help="arc expansion order K")
    common.add_argument("--starts", type=int, help="random starts per leading system")
    common.add_argument("--radii", help="comma separated sphere radii for sweep")
    common.add_argument("--json", help="also write JSON output to this file")
    common.add_argument("--csv", help="also write CSV output to this file (sweep)")
    common.add_argument("-v", "--verbose", action="store_true")

    def job_args(p):
        p.add_argument("job", nargs="?", help="job file (key = value)")
        p.add_argument("--kind", choices=KINDS)
        p.add_argument("--f", help="polynomial text, overrides the job file")
        p.add_argument("--g")
        p.add_argument("--h")
        p.add_argument("--vars", help="variable names, e.g. 'x,y,z'")
        p.add_argument("--faces", help="designated faces: indices or point lists separated by ';'")

    parser = argparse.ArgumentParser(prog="openbook", description="open book structures at infinity")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="condition report and verdict")
    job_args(p)
    p = sub.add_parser("milnor", parents=[common], help="print a Milnor-type system")
    job_args(p)
    g = p.add_mutually_exclusive_group()
    for w in ("sing", "milnor", "quotient", "zero"):
        g.add_argument(f"--{w}", dest="which", action="store_const", const=w)
    p = sub.add_parser("newton", parents=[common], help="Newton polyhedron and faces")
    job_args(p)
    p = sub.add_parser("sweep", parents=[common], help="angular Milnor set on spheres of growing radius")
    job_args(p)
    p = sub.add_parser("corpus", parents=[common], help="run a directory of jobs against expected verdicts")
    p.add_argument("directory", nargs="?", help="defaults to the shipped corpus")
    p.add_argument("-j", "--jobs", type=int, default=1)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "corpus":
            overrides = {k: getattr(args, k) for k in ("seed", "wmax", "order", "starts", "radii", "json")
                         if getattr(args, k) is not None}
            return cmd_corpus(args.directory or default_corpus(), overrides, jobs=args.jobs)
        job = _job_from_args(args)
        if args.command == "check":
            return cmd_check(job)
        if args.command == "milnor":
            return cmd_milnor(job, args.which or "milnor")
        if args.command == "newton":
            return cmd_newton(job)
        if args.command == "sweep":
            return cmd_sweep(job)
    except ParseError as exc:
        text = exc.text or ""
        print(f"error: {exc}", file=sys.stderr)
        if text:
            print("  " + text, file=sys.stderr)
            print("  " + " " * exc.pos + "^", file=sys.stderr)
        return EXIT_ERROR
    except (JobError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
