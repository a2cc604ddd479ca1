import json
import subprocess
import sys

import pytest

from conftest import L
from ratlin.cli import main
from ratlin.fixtures import diag_example, first_psm
from ratlin.linearize import Pencil
from ratlin.minbases import minimal_basis
from ratlin.polymat import RatMatrix, matrix_from_json


def _write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def row(tmp_path):
    return _write(tmp_path / "row.json", RatMatrix.from_rows([[L, L * L]]).to_json())


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_analyze(capsys, tmp_path):
    m = _write(tmp_path / "g.json", diag_example().to_json())
    code, out = _run(capsys, "analyze", "--matrix", m)
    rep = json.loads(out)
    assert code == 0 and rep["nu"] == 1 and rep["q"] == [-1]


def test_psm_verbs(capsys, tmp_path):
    p = _write(tmp_path / "p.json", first_psm().to_json())
    code, out = _run(capsys, "check-strong-irreducibility", "--psm", p)
    assert code == 0 and "false" in out.lower()
    code, out = _run(capsys, "check-properness", "--psm", p)
    assert code == 0
    code, out = _run(capsys, "transfer", "--psm", p)
    assert code == 0 and matrix_from_json(json.loads(out)["transfer"]).shape == (1, 1)


def test_linearize_and_recover(capsys, tmp_path, row):
    lin = str(tmp_path / "lin.json")
    code, _ = _run(capsys, "linearize", "--matrix", row, "--kind", "block-kronecker",
                   "--eps", "1", "--eta", "0", "--out", lin)
    assert code == 0
    rec = json.load(open(lin))
    assert rec["meta"]["strong_linearization"]
    pen = Pencil.from_json(rec).poly()
    b = _write(tmp_path / "b.json", minimal_basis(pen, "right").to_json())
    code, out = _run(capsys, "recover", "--linearization", lin, "--basis", b, "--side", "right")
    rep = json.loads(out)
    assert code == 0 and rep["basis"]["indices"] == [1] and rep["shift"] == 1
    code, out = _run(capsys, "verify", "--linearization", lin, "--matrix", row)
    assert code == 0


def test_precondition_exit_code(capsys, tmp_path):
    m = _write(tmp_path / "g.json", RatMatrix.from_rows([[L + 1]]).to_json())
    code, out = _run(capsys, "linearize", "--matrix", m, "--kind", "block-kronecker", "--eps", "0", "--eta", "0")
    assert code == 2 and json.loads(out)["error"] == "PreconditionError"


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", "--matrix", str(bad)]) == 1
    assert main(["analyze", "--matrix", str(tmp_path / "missing.json")]) == 1


def test_fiedler_verb(capsys, tmp_path):
    g = RatMatrix.from_rows([[L ** 3 + 1, L], [L, 1]])
    m = _write(tmp_path / "g.json", g.to_json())
    t = _write(tmp_path / "t.json", {"q": 3, "t": [1, 0, 2], "z": [-3]})
    code, out = _run(capsys, "fiedler", "--matrix", m, "--tuples", t, "--permute")
    assert code == 0 and json.loads(out)["meta"]["strong_linearization"]


def test_oracle_and_determinism(capsys, row):
    code, a = _run(capsys, "oracle", "--matrix", row, "--side", "both")
    _, b = _run(capsys, "oracle", "--matrix", row, "--side", "both")
    assert code == 0 and a == b


def test_reproduce_and_entry_point():
    out = subprocess.run([sys.executable, "-m", "ratlin", "reproduce-paper"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["all_pass"]
    again = subprocess.run([sys.executable, "-m", "ratlin", "reproduce-paper"], capture_output=True, text=True)
    assert again.stdout == out.stdout


def test_pipeline_through_minbases_output(capsys, tmp_path, row):
    lin = str(tmp_path / "lin.json")
    bases = str(tmp_path / "bases.json")
    assert main(["linearize", "--matrix", row, "--kind", "block-kronecker", "--eps", "1", "--eta", "0",
                 "--out", lin]) == 0
    # a pencil record is accepted wherever a matrix is
    assert main(["minbases", "--matrix", lin, "--side", "left", "--out", bases]) == 0
    code, out = _run(capsys, "recover", "--linearization", lin, "--basis", bases, "--side", "left")
    assert code == 0 and json.loads(out)["certified"]
