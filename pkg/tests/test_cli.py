import io
import json

import pytest

from qpcover.cli import FAIL, INCONCLUSIVE, INPUT, OK, run_command
from qpcover.docfile import parse_document
from qpcover.fixtures import generated_cover_text


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_all_fixtures():
    code, out, _ = run("validate")
    assert code == OK
    assert "kronecker-cover2: valid" in out


def test_validate_broken_file(tmp_path):
    from importlib import resources
    text = resources.files("qpcover.data").joinpath("kronecker-cover2.qp").read_text()
    doc = tmp_path / "bad.qp"
    # b2 now covers abar, so two lifts of abar end at vertex 1; the sheet line would no longer parse
    text = text.replace("amap b2 -> bbar", "amap b2 -> abar")
    doc.write_text("\n".join(ln for ln in text.splitlines() if not ln.startswith("sheets")) + "\n")
    code, out, _ = run("validate", "--file", str(doc))
    assert code == FAIL
    assert "INVALID" in out and "lifts of abar" in out


def test_jacobian_markov():
    code, out, _ = run("jacobian", "--fixture", "torus1p", "--order", "6")
    assert code == OK and "dim A^6 = 36" in out


def test_supports():
    code, out, _ = run("supports", "--cover", "kronecker-cover2", "--vertex", "2", "--order", "2", "--json")
    data = json.loads(out)
    assert code == OK
    assert data["vertices"] == ["1", "2", "3"] and data["arrows"] == ["a1", "b1"]


def test_grading_nice():
    code, out, _ = run("grading", "nice", "--cover", "kronecker-cover2", "--vertex", "2", "--order", "2")
    assert code == OK and "nice grading found" in out


def test_nonwrap_exit_codes():
    assert run("nonwrap", "--cover", "liegrass-cover2")[0] == OK
    code, out, _ = run("nonwrap", "--cover", "loopwrap-fixture")
    assert code == FAIL and "no assignment" in out


def test_extend_cover():
    code, out, _ = run("extend-cover", "--cover", "liegrass-cover2", "--order", "2")
    assert code == OK and "8:1" in out


def test_euler_gr():
    code, out, _ = run("euler", "gr", "--fixture", "kronecker", "--vertex", "2bar", "--dim", "1,0")
    assert code == OK and out.startswith("chi = 2")
    code, out, _ = run("euler", "gr", "--fixture", "kronecker", "--vertex", "2bar", "--dim", "1bar:1",
                       "--method", "ff")
    assert code == OK and "chi = 2" in out and "finite-field" in out


def test_euler_inconclusive(monkeypatch):
    monkeypatch.setenv("QPCOVER_PRIMES", "2,3")
    code, _, _ = run("euler", "gr", "--fixture", "kronecker", "--vertex", "2bar", "--dim", "1,0", "--method", "ff")
    assert code == INCONCLUSIVE


def test_compare_cover_example():
    code, out, _ = run("euler", "compare-cover", "--cover", "kronecker-cover2", "--dim", "1,0",
                       "--max-total", "3")
    assert code == OK
    rows = [ln.split() for ln in out.splitlines()]
    assert ["2", "(1,0)", "2", "1+1", "2", "ok"] in rows


def test_theta_stability_order_zero():
    code, out, _ = run("theta", "stability", "--fixture", "kronecker", "--order", "0")
    assert code == OK and "identity" in out


def test_theta_compare():
    code, out, _ = run("theta", "compare", "--cover", "kronecker-cover2", "--order", "3")
    assert code == OK and "no discrepancies" in out


def test_rank2_commands():
    code, out, _ = run("rank2", "complete", "--fixture", "a2", "--order", "4")
    assert code == OK and "3 nontrivial walls" in out
    code, out, _ = run("rank2", "loopcheck", "--fixture", "kronecker", "--order", "5")
    assert code == OK and "identity: True" in out


def test_restrict_walls():
    code, out, _ = run("restrict-walls", "--cover", "kronecker-cover2", "--order", "4")
    assert code == OK and "folded seed: True" in out


def test_surface_cover(tmp_path):
    path = tmp_path / "t2.qp"
    code, out, _ = run("surface", "cover", "--fixture", "torus1p", "--sheets", "2", "--output", str(path))
    assert code == OK
    doc = parse_document(path.read_text())
    assert "torus1p-cover2" in doc.covers


def test_fixtures_list():
    code, out, _ = run("fixtures", "list")
    assert code == OK and "kronecker-cover2" in out and "torus1p-cover<d>" in out


@pytest.mark.parametrize("argv", [
    ["jacobian", "--fixture", "nosuch", "--order", "2"],
    ["jacobian", "--order", "2"],
    ["euler", "gr", "--fixture", "kronecker", "--vertex", "2bar", "--dim", "1,0,0"],
    ["surface", "cover", "--fixture", "torus1p", "--sheets", "1"],
    ["nosuchcommand"],
])
def test_input_errors(argv, capsys):
    assert run(*argv)[0] == INPUT


def test_parse_error_reports_line(tmp_path):
    doc = tmp_path / "bad.qp"
    doc.write_text("[quiver q]\nvertex 1 unfrozen\narrow a 1 -> 2\n")
    code, _, err = run("validate", "--file", str(doc))
    assert code == INPUT and "3" in err


def test_bad_thread_setting(monkeypatch):
    monkeypatch.setenv("QPCOVER_THREADS", "zero")
    assert run("fixtures", "list")[0] == INPUT


def test_json_output_is_deterministic():
    argv = ["euler", "compare-cover", "--cover", "torus1p-cover3", "--vertex", "a^1", "--max-total", "2", "--json"]
    first, second = run(*argv), run(*argv)
    assert first == second
    data = json.loads(first[1])
    assert all(r["verdict"] == "ok" for r in data["rows"])
