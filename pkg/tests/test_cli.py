import json

import numpy as np
import pytest

from fptkit.cli import main
from fptkit.closedform import bachelier_levy_density
from fptkit.grid import FptSolution
from fptkit.montecarlo import McEstimate


@pytest.fixture
def work(tmp_path):
    (tmp_path / "const.json").write_text(json.dumps({"kind": "constant", "params": {"c": -1.0}}))
    (tmp_path / "lin.json").write_text(json.dumps({"kind": "linear", "params": {"a": 1.0, "slope": 0.5}}))
    (tmp_path / "sq0.json").write_text(json.dumps({"kind": "sqrt", "params": {"p": 1.0, "q": 0.0}}))
    (tmp_path / "atoms.json").write_text(json.dumps([[0.0, 0.5], [1.0, 0.5]]))
    return tmp_path


def run(work, *args):
    return main([str(a).replace("@", str(work) + "/") for a in args])


def _solve(work, name="f.csv", boundary="@const.json", p="-1"):
    assert run(work, "solve", "--boundary", boundary, "--p", p, "--horizon", "2", "--steps", "256",
               "--out", "@" + name) == 0
    return work / name


def test_solve_writes_257_rows(work):
    path = _solve(work)
    rows = [ln for ln in path.read_text().splitlines() if ln and ln[0].isdigit()]
    assert len(rows) == 257
    assert FptSolution.from_csv(path).meta["p"] == -1


def test_check_case5(work, capsys):
    _solve(work)
    capsys.readouterr()
    assert run(work, "check", "--boundary", "@const.json", "--solution", "@f.csv", "--equation", "case5") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,residual,lhs,relative" and len(lines) == 4
    assert all(float(ln.split(",")[3]) <= 5e-3 for ln in lines[1:])


@pytest.mark.parametrize("eq,extra", [("p:-0.5", []), ("p:0.5", ["--y", "-2"]), ("widder:@atoms.json", []),
                                      ("case4", [])])
def test_check_variants(work, capsys, eq, extra):
    _solve(work, p="0")
    assert run(work, "check", "--boundary", "@const.json", "--solution", "@f.csv", "--equation", eq, *extra) == 0
    rel = [float(ln.split(",")[3]) for ln in capsys.readouterr().out.strip().splitlines()[1:]]
    assert max(rel) <= 5e-3


def test_domain_error_exit_code(work, capsys):
    assert run(work, "solve", "--boundary", "@sq0.json", "--p", "-1", "--horizon", "2", "--steps", "64",
               "--out", "@g.csv") == 2
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["kind"] == "domain" and rec["level"] == "error"
    assert run(work, "check", "--boundary", "@missing.json", "--solution", "@f.csv", "--equation", "case5") == 2


def test_accuracy_error_exit_code(capsys):
    assert main(["closed-form", "--family", "quadratic", "--params", "p=1", "q=1", "--times", "1"]) == 3
    assert json.loads(capsys.readouterr().err.strip())["kind"] == "accuracy"


def test_fredholm_complex_alpha(work, capsys):
    assert run(work, "solve", "--boundary", "@const.json", "--p", "-1", "--horizon", "20", "--steps", "1024",
               "--out", "@long.csv") == 0
    capsys.readouterr()
    assert run(work, "fredholm", "--boundary", "@const.json", "--solution", "@long.csv", "--alpha", "1.0+1.0i",
               "--tail-policy", "analytic-fit") == 0
    out = capsys.readouterr().out.strip().splitlines()
    re, im = map(float, out[1].split(",")[:2])
    assert abs(complex(re, im)) <= 1e-2
    assert run(work, "fredholm", "--boundary", "@const.json", "--solution", "@long.csv", "--alpha", "1..2i") == 2


def test_closed_form_tables(work, capsys):
    assert main(["closed-form", "--family", "bachelier-levy", "--params", "a=1", "slope=0.5",
                 "--times", "0.5,1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert float(lines[2].split(",")[1]) == pytest.approx(bachelier_levy_density(1, 0.5, 1.0), rel=1e-14)
    _solve(work)
    capsys.readouterr()
    assert run(work, "closed-form", "--family", "reflection", "--params", "c=-1", "--solution", "@f.csv") == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 257
    assert run(work, "closed-form", "--family", "sqrt-mellin", "--params", "x=0", "p=1", "q=2",
               "--solution", "@f.csv") == 2


def test_specfun_eval(capsys):
    assert main(["specfun", "eval", "--fn", "pcf", "--args", "-0.5", "1", "2"]) == 0
    vals = capsys.readouterr().out.split()
    assert vals[0] == "0.653072026699362" and len(vals) == 2
    assert main(["specfun", "eval", "--fn", "airy", "--args", "0"]) == 0
    assert capsys.readouterr().out.strip() == "0.355028053887817"
    assert main(["specfun", "eval", "--fn", "hermite", "--args", "3", "1"]) == 0
    assert float(capsys.readouterr().out) == -4.0
    assert main(["specfun", "eval", "--fn", "kq", "--args", "0"]) == 2


def test_transform_identity_and_drift(work):
    _solve(work)
    assert run(work, "transform", "--boundary", "@const.json", "--solution", "@f.csv", "--out", "@id.csv") == 0
    assert (work / "id.csv").read_text() == (work / "f.csv").read_text()
    assert run(work, "transform", "--boundary", "@const.json", "--solution", "@f.csv", "--alpha", "0.5",
               "--out", "@t1.csv", "--boundary-out", "@t1.json") == 0
    spec = json.loads((work / "t1.json").read_text())
    assert spec["kind"] == "transformed" and spec["transform"]["alpha"] == 0.5
    _solve(work, "lin.csv", "@lin.json")
    a, b = FptSolution.from_csv(work / "t1.csv"), FptSolution.from_csv(work / "lin.csv")
    mask = a.t >= 0.1
    assert np.max(np.abs(a.density - b.density)[mask]) <= 5e-3
    # written transformed spec is readable by the solver
    assert run(work, "solve", "--boundary", "@t1.json", "--p", "-1", "--horizon", "2", "--steps", "64",
               "--out", "@t1s.csv") == 0
    assert run(work, "transform", "--boundary", "@const.json", "--solution", "@f.csv", "--gamma", "2",
               "--horizon", "2", "--out", "@bad.csv") == 2


def test_mc_roundtrip_and_determinism(work):
    args = ["mc", "--boundary", "@const.json", "--horizon", "2", "--steps", "32", "--paths", "5000", "--seed", "4"]
    assert run(work, *args, "--out", "@m1.csv") == 0
    assert run(work, *args, "--out", "@m2.csv") == 0
    assert (work / "m1.csv").read_bytes() == (work / "m2.csv").read_bytes()
    assert McEstimate.from_csv(work / "m1.csv").n_paths == 5000


def test_json_diagnostics_and_quiet(work, capsys):
    assert run(work, "--json-diagnostics", "solve", "--boundary", "@const.json", "--p", "0", "--horizon", "2",
               "--steps", "64", "--out", "@d.csv") == 0
    rec = json.loads(capsys.readouterr().err.strip())
    assert rec["event"] == "solve" and rec["rows"] == 65
    assert run(work, "--quiet", "--json-diagnostics", "solve", "--boundary", "@const.json", "--p", "0",
               "--horizon", "2", "--steps", "64", "--out", "@d.csv") == 0
    assert capsys.readouterr().err == ""


def test_second_kind_subcommand(work):
    path = _solve(work, "k.csv", p="second-kind")
    assert FptSolution.from_csv(path).meta["p"] == "second-kind"
