import json

import pytest
from click.testing import CliRunner

from nilpiece.cli import main
from nilpiece.exactlin import Matrix, field
from nilpiece.formspace import make_split_space
from nilpiece.gradings import PieceLabel, grading_from_partition

F2 = field(2)


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, env=None):
        return runner.invoke(main, [str(a) for a in args], env=env)

    return invoke


def test_labels(run):
    res = run("labels", "O", 5)
    assert res.exit_code == 0
    assert json.loads(res.output) == ["[5]", "[3,1,1]", "[2,2,1]", "[1,1,1,1,1]"]


def test_classify_nilpotent_and_unipotent(run, tmp_path):
    space = tmp_path / "sp4.txt"
    space.write_text(make_split_space("Sp", 4, F2).to_text())
    elem = tmp_path / "x.txt"
    elem.write_text(Matrix.from_rows(F2, [[0, 0, 1, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0]]).to_text())
    res = run("classify", "--space", space, "--elem", elem)
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["label"] == "[4]"
    assert out["steps"][0]["dim"] == 4
    ident = tmp_path / "one.txt"
    ident.write_text(Matrix.identity(F2, 4).to_text())
    res = run("classify", "--space", space, "--elem", ident, "--unipotent")
    assert json.loads(res.output)["label"] == "[1,1,1,1]"


def test_classify_rejects_non_members(run, tmp_path):
    space = tmp_path / "sp2.txt"
    space.write_text(make_split_space("Sp", 2, F2).to_text())
    elem = tmp_path / "x.txt"
    elem.write_text(Matrix.identity(F2, 2).to_text())
    res = run("classify", "--space", space, "--elem", elem)
    assert res.exit_code == 2 and "nilpotent" in res.output


def test_witness(run, tmp_path):
    gs = grading_from_partition(PieceLabel("O", (3, 1, 1)), F2)
    grading = tmp_path / "g.txt"
    grading.write_text(gs.to_text())
    zero = tmp_path / "zero.txt"
    zero.write_text(Matrix.zeros(F2, 5).to_text())
    res = run("witness", "--grading", grading, "--elem", zero)
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["in_set"] is False
    head, body = out["witness"].split("\n", 1)
    assert head.startswith("O.case")
    assert Matrix.from_text(body).nrows == 5
    other = tmp_path / "space.txt"
    other.write_text(make_split_space("O", 5, F2).to_text())
    res = run("witness", "--space", other, "--grading", grading, "--elem", zero)
    assert res.exit_code == 2 and "split model" in res.output
    same = tmp_path / "same.txt"
    same.write_text(gs.space.to_text())
    assert run("witness", "--space", same, "--grading", grading, "--elem", zero).exit_code == 0


def test_witness_inside(run, tmp_path):
    from nilpiece.pieces import enumerate_bang_set
    gs = grading_from_partition(PieceLabel("O", (3, 1, 1)), F2)
    grading = tmp_path / "g.txt"
    grading.write_text(gs.to_text())
    elem = tmp_path / "a.txt"
    elem.write_text(enumerate_bang_set(gs)[0].to_text())
    out = json.loads(run("witness", "--grading", grading, "--elem", elem).output)
    assert out["in_set"] is True and out["report"] == {"2": True}


def test_census_outputs(run, tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    res = run("census", "Sp", 4, 2, "--out", out, "--csv", table)
    assert res.exit_code == 0
    data = json.loads(out.read_text())
    assert data["totals"]["nilpotent"] == 256 and all(data["verdicts"].values())
    assert table.read_text().splitlines()[0].startswith("label,")


def test_census_budget(run):
    res = run("census", "GL", 4, 3, env={"NILPIECE_BUDGET": "1000"})
    assert res.exit_code == 2 and "NILPIECE_BUDGET" in res.output


def test_poly_and_orbits(run):
    res = run("poly", "GL", 2, "--q", "2,3")
    assert res.exit_code == 0 and json.loads(res.output)["ok"]
    res = run("orbits", "O", "--partition", "3,1,1", "--q", 2)
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["X_size"] == 2 and out["ok"]
