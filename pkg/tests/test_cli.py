import io
import json
import subprocess
import sys

import pytest

from misodof.cli import main
from misodof.poly_core import InequalitySystem


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def texts(obj):
    return sorted(str(c) for c in InequalitySystem.from_json(obj).constraints)


# ---------------------------------------------------------------- verify


def test_verify_k2(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--alpha", "9/10,3/10", "--json", str(path))
    assert code == 0
    rep = json.loads(path.read_text())
    assert rep["theorem2"]["equivalent"] is True
    assert all(s["match"] for s in rep["induction_steps"])
    assert rep["sum_dof"]["agree"] is True
    assert set(rep["timings_ms"]) >= {"build", "project", "equivalence", "induction", "sum_dof", "total"}
    assert out.splitlines()[-1] == "PASS"


def test_verify_zero_alpha_final_region(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, _, _ = run(capsys, "verify", "--alpha", "0,0,0", "--json", str(path))
    assert code == 0
    final = json.loads(path.read_text())["final_region"]
    assert texts(final) == ["-d1 <= 0", "-d2 <= 0", "-d3 <= 0", "d1 + d2 + d3 <= 1"]


def test_verify_trace_embeds_steps(capsys, tmp_path):
    path = tmp_path / "report.json"
    assert run(capsys, "verify", "--alpha", "1,1/2,1/5", "--trace", "--json", str(path))[0] == 0
    steps = json.loads(path.read_text())["trace"]["steps"]
    assert [s["eliminated"] for s in steps] == ["dc1", "dc2", "dc3"]


@pytest.mark.parametrize("argv", [
    ["verify", "--alpha", "2"],
    ["verify", "--alpha", "1/2,x"],
    ["verify"],
    ["verify", "--batch", "2"],
    ["bogus"],
    ["region", "intermediate", "--alpha", "1,1/2"],
    ["region", "intermediate", "--alpha", "1,1/2", "--k", "5"],
    ["synthesize", "--alpha", "1,1/2", "--dof", "1"],
    ["synthesize", "--alpha", "1,1/2", "--dof", "-1,0"],
    ["project"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_malformed_input_files_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "project", "--input", str(bad))[0] == 2
    bad.write_text('{"vars": ["d1"], "constraints": [{"coeffs": {"q!": "1"}, "rel": "<=", "rhs": "1"}]}')
    assert run(capsys, "project", "--input", str(bad))[0] == 2
    assert run(capsys, "project", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "verify", "--profile", str(bad))[0] == 2


def test_verify_batch_is_order_stable(capsys, tmp_path):
    path = tmp_path / "batch.json"
    code, out, _ = run(capsys, "verify", "--batch", "3", "--k", "3", "--seed", "5", "--jobs", "1", "--json", str(path))
    assert code == 0
    lines = out.strip().splitlines()
    assert [ln.split(":")[0] for ln in lines[:3]] == ["case 0", "case 1", "case 2"]
    assert lines[-1].startswith("3/3 cases passed")
    assert json.loads(path.read_text())["failed"] == []
    # same seed, same cases
    assert run(capsys, "verify", "--batch", "3", "--k", "3", "--seed", "5", "--jobs", "1")[1] == out


def test_profile_from_stdin(capsys, monkeypatch):
    code, out, _ = run(capsys, "sumdof", "--profile", "-", stdin='{"alpha": ["1", "1/2", "1/5"]}',
                       monkeypatch=monkeypatch)
    assert code == 0 and json.loads(out)["formula"] == "17/10"


# ---------------------------------------------------------------- region / project


def test_region_outer_k2(capsys):
    code, out, _ = run(capsys, "region", "outer", "--alpha", "9/10,3/10")
    assert code == 0
    assert texts(json.loads(out)) == ["-d1 <= 0", "-d2 <= 0", "d1 + d2 <= 13/10", "d1 <= 1", "d2 <= 1"]


def test_region_intermediate(capsys):
    code, out, _ = run(capsys, "region", "intermediate", "--alpha", "1,1/2,1/5", "--k", "1")
    assert code == 0
    rows = texts(json.loads(out))
    assert "d1 + dc2 + dc3 <= 1" in rows and "d2 - dc2 <= 1/2" in rows


def test_region_rs9_k1(capsys):
    code, out, _ = run(capsys, "region", "rs9", "--alpha", "1")
    assert code == 0
    assert json.loads(out)["vars"] == ["d1", "dc1"]


def test_region_uses_original_labels(capsys):
    _, out, _ = run(capsys, "region", "rs9", "--alpha", "3/10,9/10")
    assert "d2 - dc2 <= 9/10" in texts(json.loads(out))


def test_region_project_round_trip(capsys, tmp_path, monkeypatch):
    _, region, _ = run(capsys, "region", "rs9", "--alpha", "9/10,3/10")
    code, out, _ = run(capsys, "project", "--input", "-", "--eliminate", "dc1,dc2", stdin=region,
                       monkeypatch=monkeypatch)
    assert code == 0
    assert texts(json.loads(out)) == ["-d1 <= 0", "-d2 <= 0", "d1 + d2 <= 13/10", "d1 <= 1", "d2 <= 1"]
    # bit-exact re-serialization
    assert InequalitySystem.loads(out).dumps() == out


def test_project_lifted_region_through_equalities(capsys, monkeypatch):
    _, region, _ = run(capsys, "region", "rs", "--alpha", "9/10,3/10")
    code, out, _ = run(capsys, "project", "--input", "-", "--eliminate", "dp1,dp2,a,dc1,dc2", "--prune", "full",
                       stdin=region, monkeypatch=monkeypatch)
    assert code == 0
    assert texts(json.loads(out)) == ["-d1 <= 0", "-d2 <= 0", "d1 + d2 <= 13/10", "d1 <= 1", "d2 <= 1"]


def test_project_empty_list_canonicalizes(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text('{"vars": ["d1"], "constraints": [{"coeffs": {"d1": "2"}, "rel": "<=", "rhs": "2"},'
                 ' {"coeffs": {"d1": "1"}, "rel": "<=", "rhs": "1"}]}')
    code, out, _ = run(capsys, "project", "--input", str(f))
    assert code == 0 and texts(json.loads(out)) == ["d1 <= 1"]


def test_project_trace_output(capsys, monkeypatch):
    _, region, _ = run(capsys, "region", "rs9", "--alpha", "9/10,3/10")
    code, out, _ = run(capsys, "project", "--input", "-", "--eliminate", "dc1", "--trace", stdin=region,
                       monkeypatch=monkeypatch)
    obj = json.loads(out)
    assert code == 0 and set(obj) == {"system", "trace"}
    assert obj["trace"]["steps"][0]["eliminated"] == "dc1"


def test_project_infeasible_exit_3(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text('{"vars": ["d1"], "constraints": [{"coeffs": {}, "rel": "<=", "rhs": "-1"}]}')
    assert run(capsys, "project", "--input", str(f))[0] == 3
    f.write_text('{"vars": ["d1"], "constraints": [{"coeffs": {"d1": "1"}, "rel": "<=", "rhs": "0"},'
                 ' {"coeffs": {"d1": "-1"}, "rel": "<=", "rhs": "-1"}]}')
    assert run(capsys, "project", "--input", str(f), "--eliminate", "d1")[0] == 3


# ---------------------------------------------------------------- synthesize / vertices / sumdof


def test_synthesize_witness(capsys):
    code, out, _ = run(capsys, "synthesize", "--alpha", "9/10,3/10", "--dof", "1,3/10")
    assert code == 0
    assert json.loads(out) == {"achievable": True, "a": "3/10", "d_private": ["3/10", "3/10"],
                               "d_common": ["7/10", "0"]}


def test_synthesize_zero(capsys):
    code, out, _ = run(capsys, "synthesize", "--alpha", "9/10,3/10", "--dof", "0,0")
    assert code == 0 and json.loads(out)["a"] == "0"


def test_synthesize_not_achievable(capsys):
    code, out, _ = run(capsys, "synthesize", "--alpha", "9/10,3/10", "--dof", "1,1")
    assert code == 1 and json.loads(out)["violated"] == "d1 + d2 <= 13/10"


def test_vertices_of_simplex(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text('{"vars": ["d1", "d2"], "constraints": ['
                 '{"coeffs": {"d1": "1", "d2": "1"}, "rel": "<=", "rhs": "1"},'
                 '{"coeffs": {"d1": "-1"}, "rel": "<=", "rhs": "0"},'
                 '{"coeffs": {"d2": "-1"}, "rel": "<=", "rhs": "0"}]}')
    code, out, _ = run(capsys, "vertices", "--input", str(f))
    assert code == 0 and len(json.loads(out)["vertices"]) == 3


def test_vertices_of_outer_bounds(capsys):
    _, out, _ = run(capsys, "vertices", "--alpha", "9/10,3/10")
    assert len(json.loads(out)["vertices"]) == 5
    _, out, _ = run(capsys, "vertices", "--alpha", "1/2")
    assert [v["point"] for v in json.loads(out)["vertices"]] == [{"d1": "0"}, {"d1": "1"}]


def test_vertices_unbounded_exit_3(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text('{"vars": ["d1"], "constraints": [{"coeffs": {"d1": "-1"}, "rel": "<=", "rhs": "0"}]}')
    assert run(capsys, "vertices", "--input", str(f))[0] == 3


def test_sumdof(capsys):
    code, out, _ = run(capsys, "sumdof", "--alpha", "1,1/2,1/5")
    obj = json.loads(out)
    assert code == 0 and obj["formula"] == obj["lp"] == "17/10" and obj["agree"] is True


def test_json_flag_mirrors_stdout(capsys, tmp_path):
    path = tmp_path / "o.json"
    _, out, _ = run(capsys, "region", "outer", "--alpha", "1,1/2", "--json", str(path))
    assert path.read_text() == out


# ---------------------------------------------------------------- process-level behaviour


def _cli(*argv, stdin=None):
    return subprocess.run([sys.executable, "-m", "misodof", *argv], input=stdin,
                          capture_output=True, text=True, timeout=120)


def test_identical_invocations_are_byte_identical():
    for argv in (["verify", "--alpha", "1,1/2,1/5"], ["region", "rs", "--alpha", "3/10,9/10"],
                 ["vertices", "--alpha", "1,1/2,1/5"], ["synthesize", "--alpha", "1,1/2", "--dof", "1,1/2"]):
        a, b = _cli(*argv), _cli(*argv)
        assert a.returncode == b.returncode == 0
        assert a.stdout == b.stdout and a.stdout


def test_module_entry_point_pipes():
    region = _cli("region", "outer", "--alpha", "9/10,3/10").stdout
    res = _cli("project", "--input", "-", stdin=region)
    assert res.returncode == 0
    assert InequalitySystem.loads(res.stdout) == InequalitySystem.loads(region)


def test_never_panics_on_garbage():
    res = _cli("project", "--input", "-", stdin="\x00\x01garbage")
    assert res.returncode == 2 and "Traceback" not in res.stderr
