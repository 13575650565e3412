import io
import json

import pytest

from normgeo.cli import run
from normgeo.spaces import parse_space, parse_vector
from normgeo.bilinear import parse_operator

DIAG = '{"X":"lp:2:2","Y":"lp:2:2","Z":"lp:2:2","c":[[[1,0],[0,0]],[[0,0],[0,1]]]}'
E111 = '{"X":"lp:2:2","Y":"lp:2:2","Z":"lp:2:2","c":[[[1,0],[0,0]],[[0,0],[0,0]]]}'
E122 = '{"X":"lp:2:2","Y":"lp:2:2","Z":"lp:2:2","c":[[[0,0],[0,1]],[[0,0],[0,0]]]}'


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_derive_example():
    code, out, _ = call("derive", "--space", '{"kind":"lp","p":1,"n":3}', "--x", "[1,-2,0]",
                        "--y", "[1,1,-3]")
    r = json.loads(out)
    assert code == 0 and r["rho_plus"] == 3 and r["rho_minus"] == -3


def test_derive_numeric_and_vector_literal():
    code, out, _ = call("derive", "--space", "lp:inf:2", "--x", '{"space":"lp:inf:2","v":[1,1]}',
                        "--y", "[1,-1]", "--method", "numeric")
    r = json.loads(out)
    assert code == 0 and (r["rho_plus"], r["rho_minus"]) == (1, -1) and r["step_trace"]


def test_ortho_exit_codes():
    assert call("ortho", "--relation", "birkhoff", "--space", "lp:2:2", "--x", "[1,0]", "--y", "[0,1]")[0] == 0
    code, out, _ = call("ortho", "--space", "lp:2:2", "--x", "[1,0]", "--y", "[1,1]")
    assert code == 1 and json.loads(out)["holds"] is False


@pytest.mark.parametrize("rel,extra,expect", [
    ("strong", [], 0), ("approx", ["--eps", "0.1"], 0), ("bstar", [], 1), ("rho", [], 0),
    ("positive", [], 0), ("negative", [], 0), ("james", [], 0)])
def test_every_relation(rel, extra, expect):
    code, out, _ = call("ortho", "--relation", rel, "--space", "lp:1:2", "--x", "[1,0]", "--y", "[0,1]", *extra)
    assert code == expect and json.loads(out)["relation"] == rel.replace("bstar", "b_star")


def test_approx_needs_eps():
    code, _, err = call("ortho", "--relation", "approx", "--space", "lp:2:2", "--x", "[1,0]", "--y", "[0,1]")
    assert code == 2 and "eps" in err


@pytest.mark.parametrize("argv", [
    ["ortho", "--space", "lp:2:3", "--x", "[1,0]", "--y", "[0,1]"],
    ["ortho", "--space", "lp:2:2", "--x", "[1,0", "--y", "[0,1]"],
    ["ortho", "--relation", "nope", "--space", "lp:2:2", "--x", "[1,0]", "--y", "[0,1]"],
    ["derive", "--space", '{"kind":"lq"}', "--x", "[1]", "--y", "[1]"],
    ["derive", "--space", "lp:2:2", "--x", "[0,0]", "--y", "[1,0]", "--method", "closed"],
    ["verify", "--theorem", "NOPE"],
    ["bilinear-norm", "--op", '{"X":"lp:2:2"}'],
    ["frobnicate"],
])
def test_input_errors_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == "" and err.startswith("normgeo: error:")


def test_input_file(tmp_path):
    p = tmp_path / "in.json"
    p.write_text(json.dumps({"space": {"kind": "lp", "p": "inf", "n": 2}, "x": [1, 1], "y": [1, -1]}))
    code, out, _ = call("ortho", "--relation", "james", "--input", str(p))
    assert code == 0 and json.loads(out)["holds"]
    code, out, _ = call("ortho", "--input", str(p), "--y", "[1,0]")
    assert code == 0
    code, _, err = call("ortho", "--input", str(tmp_path / "missing.json"))
    assert code == 2


def test_cone_and_support():
    code, out, _ = call("cone", "--space", "lp:2:2", "--x", "[1,0]", "--y", "[0,1]")
    r = json.loads(out)
    assert code == 0 and r["v1"] == pytest.approx([0, 1], abs=1e-9)
    code, out, _ = call("support", "--space", "lp:1:3", "--x", "[1,0,0]", "--y", "[0,2,-1]")
    r = json.loads(out)
    assert code == 0 and len(r["extreme"]) == 4 and r["value_range"] == [-3, 3]


def test_bilinear_commands():
    code, out, _ = call("bilinear-norm", "--op", DIAG)
    r = json.loads(out)
    assert code == 0 and r["norm"] == pytest.approx(1) and r["attainment_set"]["count"] == 2
    code, out, _ = call("bilinear-ortho", "--op", E111, "--a", E122, "--sequence")
    r = json.loads(out)
    assert code == 0 and r["holds"] and "a" in r["sequence"]["certified_by"]
    assert call("bilinear-ortho", "--op", E111, "--a", E111)[0] == 1
    assert call("bilinear-ortho", "--op", E111, "--a", E111, "--eps", "0.9")[0] == 1
    assert call("bilinear-smooth", "--op", E111)[0] == 0
    code, out, _ = call("bilinear-smooth", "--op", DIAG)
    assert code == 1 and json.loads(out)["witness"]["orbits"] == 2


def test_verify_and_list():
    code, out, _ = call("verify", "--theorem", "TLINF", "--trials", "50", "--seed", "1")
    r = json.loads(out)
    assert code == 0 and r["theorem_id"] == "TLINF" and r["seed"] == 1 and "wall_time" not in r
    code, out, _ = call("verify", "--theorem", "TL1P", "--trials", "20", "--format", "table")
    assert code == 0 and out.startswith("TL1P") and "PASS" in out
    code, out, _ = call("list-theorems")
    ids = [row["theorem_id"] for row in json.loads(out)]
    assert "BOP-SEQ" in ids and "T2.1" in ids


def test_verify_all_aggregates():
    code, out, _ = call("verify", "--theorem", "all", "--trials", "8")
    r = json.loads(out)
    assert code == 0 and r["counterexamples"] == 0 and r["suites"] == len(r["reports"])


def test_output_is_deterministic():
    argv = ["bilinear-norm", "--op", DIAG, "--seed", "3"]
    assert call(*argv)[1] == call(*argv)[1]


def test_emitted_payloads_reparse():
    _, out, _ = call("bilinear-norm", "--op", DIAG)
    r = json.loads(out)
    for x, y in r["attainment_set"]["representatives"]:
        parse_vector(x, parse_space("lp:2:2"))
        parse_vector(y, parse_space("lp:2:2"))
    _, out, _ = call("support", "--space", "lp:inf:2", "--x", "[1,1]")
    parse_space(json.loads(out)["space"])
    parse_operator(DIAG)


def test_table_format():
    code, out, _ = call("derive", "--space", "lp:2:2", "--x", "[3,4]", "--y", "[1,0]", "--format", "table")
    assert code == 0 and "rho_plus: 0.6" in out


def test_help_lists_schemas(capsys):
    with pytest.raises(SystemExit) as e:
        run(["ortho", "--help"])
    assert e.value.code == 0
    assert "lp:<p>:<n>" in capsys.readouterr().out
