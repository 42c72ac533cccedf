import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from twistlab.cli import emit_report, run
from twistlab.complexes import max_shift

ROOT = Path(__file__).resolve().parent.parent
A3 = str(ROOT / "scenarios" / "a3_d2.twl")
HEADER = "field QQ\ncy 2\ngraph A path 3\nalgebra zigzag\n"


def call(*argv):
    buf = io.BytesIO()
    code = run(list(argv), buf)
    return code, buf.getvalue()


def call_json(*argv):
    code, out = call(*argv, "--json")
    return code, json.loads(out)


@pytest.fixture
def scen(tmp_path):
    def make(text, name="s.twl"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def test_validate_shipped():
    code, rep = call_json("validate", A3)
    assert code == 0 and rep["ok"]
    assert len(rep["expectations"]) == 16


def test_commute_orthogonal():
    code, rep = call_json("commute", A3, "--pair", "P1,P3")
    assert code == 0 and rep["verdict"] == "COMMUTE_ORTHOGONAL"


def test_commute_not_commute_has_witness():
    code, rep = call_json("commute", A3, "--pair", "P1,P2")
    assert code == 0 and rep["verdict"] == "NOT_COMMUTE" and "witness" in rep


def test_check_spherical_ext_table_keys():
    code, rep = call_json("check-spherical", A3, "--object", "P1")
    assert code == 0 and rep["ext_table"] == {"0": 1, "2": 1}


def test_member_schema():
    code, rep = call_json("member", A3, "--e", "P1", "--g", "S")
    assert code == 0 and "filtration_shifts" in rep and rep["in_thick_subcategory"]


def test_twist_and_decompose_and_ktheory():
    code, rep = call_json("twist", A3, "--e", "P1", "--g", "P2")
    assert code == 0 and rep["k_theory_consistent"]
    code, rep = call_json("decompose", A3, "--object", "Mx")
    assert code == 0 and rep["recovery"]["multiplicities"] == [2, 1]
    code, rep = call_json("ktheory", A3)
    assert code == 0 and rep["gram"] == [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]


def test_ledger_file_text_output():
    code, out = call("ledger", str(ROOT / "scenarios" / "sec3.ledger"))
    text = out.decode()
    assert code == 0
    for piece in ["ext1(Ox, F)  ", "r2 + d - 1", "status: ok"]:
        assert piece in text


def test_ledger_block_in_scenario(scen):
    path = scen(HEADER + "ledger L {\n  entity A B C\n  ses S: A -> B -> C max 1\n"
                "  fact hom(C, C) = 1\n  fact hom(B, C) = 3\n"
                "  map hom(C, C) -> hom(B, C) injective\n"
                "  map hom(B, C) -> hom(A, C) surjective\n  derive hom(A, C)\n}\n")
    code, rep = call_json("ledger", path)
    assert code == 0
    assert rep["ledgers"]["L"]["derivations"][0]["value"] == "2"


def test_exit_1_on_failed_expectation(scen, capsys):
    path = scen(HEADER + "expect ext P(1) P(1) = {0:1}\n")
    code, _ = call("validate", path)
    assert code == 1
    assert ":5: expectation failed" in capsys.readouterr().err


def test_exit_2_on_unresolved_name(scen, capsys):
    path = scen(HEADER + "object X = P(1) + Q\n")
    code, _ = call("validate", path)
    assert code == 2
    assert "5:19:" in capsys.readouterr().err


def test_exit_2_on_ledger_syntax(tmp_path, capsys):
    p = tmp_path / "bad.ledger"
    p.write_text("entity A\nfact hom(A, A) = 1 2\n")
    code, _ = call("ledger", str(p))
    assert code == 2 and "2:" in capsys.readouterr().err


def test_exit_1_on_contradiction(tmp_path, capsys):
    p = tmp_path / "c.ledger"
    p.write_text("entity A\nfact hom(A, A) = 1\nfact hom(A, A) = 2\n")
    code, _ = call("ledger", str(p))
    assert code == 1 and "contradiction" in capsys.readouterr().err


def test_exit_2_on_missing_file():
    assert call("validate", "/nonexistent/x.twl")[0] == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        run(["frobnicate", A3], io.BytesIO())
    assert info.value.code == 2


def test_machine_output_deterministic():
    a = call("decompose", A3, "--object", "Mx", "--json", "--seed", "3")[1]
    b = call("decompose", A3, "--object", "Mx", "--json", "--seed", "3")[1]
    assert a == b


def test_machine_output_deterministic_across_processes():
    cmd = [sys.executable, "-m", "twistlab.cli", "member", A3, "--e", "P1", "--g", "S", "--json"]
    outs = {subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)}
    assert len(outs) == 1


def test_max_shift_window_is_scoped(scen):
    before = max_shift()
    path = scen(HEADER + "object X = P(1)[5]\nexpect spherical X = true\n")
    assert call("validate", path, "--max-shift", "3")[0] == 2
    assert call("validate", path)[0] == 0
    assert max_shift() == before


def test_emit_report_formats():
    from fractions import Fraction
    out = emit_report({"b": Fraction(1, 3), "a": {"2": 1, "0": 1}}, "machine")
    assert out.decode().index('"b"') < out.decode().index('"a"')
    assert json.loads(out) == {"b": "1/3", "a": {"2": 1, "0": 1}}
    text = emit_report({"x": 1}, "text").decode()
    assert "x" in text
