import json
from pathlib import Path

import pytest

from app.cli import main
from app.services.rank_service import PARITY_VIOLATED, SATISFIED, WINDOW_FAILURE

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_homology_of_a_module_file(capsys):
    code, out, _ = run(capsys, "homology", "--module", SAMPLES / "koszul2.json")
    assert code == 0
    report = json.loads(out)
    assert report["dims"] == {"0": 1}
    assert report["total"] == 1


def test_homology_of_a_builtin(capsys):
    code, out, _ = run(capsys, "homology", "--builtin", "sphere", "--dim", "2")
    assert code == 0
    report = json.loads(out)
    assert report["total"] == 2
    assert report["dims"]["2"] == 1


def test_text_output(capsys):
    code, out, _ = run(capsys, "homology", "--module", SAMPLES / "koszul2.json", "--text")
    assert code == 0
    assert out.startswith("H(M), window")


def test_window_failure_exits_with_two(capsys):
    code, out, err = run(capsys, "homology", "--module", SAMPLES / "koszul2.json", "--window", "-1", "1")
    assert code == 2
    assert out == ""
    error = json.loads(err.strip().splitlines()[-1])
    assert error["error"] == "WindowTooSmallError"
    assert error["exit_code"] == 2


def test_schema_errors_exit_with_one(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, err = run(capsys, "homology", "--module", broken)
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["error"] == "SchemaError"

    code, _, _ = run(capsys, "homology", "--module", tmp_path / "missing.json")
    assert code == 1

    code, _, _ = run(capsys, "euler")
    assert code == 1


def test_json_output_is_deterministic(capsys):
    argv = ("hirsch-brown", "--complex", SAMPLES / "circle.json")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    model = json.loads(first[1])
    assert model["rank"] == 2
    assert model["twist_weights"] == [2]
    assert model["oracle"]["agree"]


def test_hirsch_brown_on_a_sphere(capsys):
    code, out, _ = run(capsys, "hirsch-brown", "--builtin", "sphere", "--dim", "2")
    assert code == 0
    assert json.loads(out)["twist_weights"] == [3]


def test_hirsch_brown_on_an_action_document(capsys, tmp_path):
    circle = tmp_path / "circle.json"
    circle.write_text(json.dumps({
        "r": 1,
        "generators": [{"name": "a", "degree": 0}, {"name": "b", "degree": 0},
                       {"name": "p", "degree": 1}, {"name": "q", "degree": 1}],
        "differential": [["0", "0", "1", "1"], ["0", "0", "1", "1"], ["0", "0", "0", "0"], ["0", "0", "0", "0"]],
        "action": {"g1": {"a": "b", "p": "q"}},
    }))
    code, out, _ = run(capsys, "hirsch-brown", "--module", circle)
    assert code == 0
    model = json.loads(out)
    assert model["rank"] == 2
    assert model["oracle"]["agree"]

    fixed = tmp_path / "fixed.json"
    fixed.write_text(json.dumps({
        "r": 1, "generators": [{"name": "v", "degree": 0}], "differential": [["0"]], "action": {"g1": {}},
    }))
    code, _, err = run(capsys, "hirsch-brown", "--module", fixed)
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["error"] == "NotFreeError"


def test_hirsch_brown_with_products(capsys):
    code, out, _ = run(capsys, "hirsch-brown", "--builtin", "simplicial-circle", "--products")
    assert code == 0
    products = json.loads(out)["products"]
    assert products["m2_matches_cup_product"]
    assert products["coassociative"]
    assert products["t_equivariant"] == [False]


def test_carlsson_needs_a_module(capsys):
    code, _, _ = run(capsys, "carlsson")
    assert code == 1
    code, out, _ = run(capsys, "carlsson", "--module", SAMPLES / "koszul2.json")
    assert code == 0
    assert json.loads(out)["rank"] == 4


def test_rank_check_on_a_cone(capsys):
    code, out, _ = run(capsys, "rank-check", "--module", SAMPLES / "cone_x1sq.json")
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == PARITY_VIOLATED
    assert report["bound"] == 2


def test_rank_check_on_a_random_instance_is_deterministic(capsys):
    argv = ("rank-check", "--random", "2", "6", "42", "--window", "-8", "4")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    report = json.loads(first[1])
    assert report["verdict"] == SATISFIED
    assert report["window"] == [-8, 4]


def test_rank_check_window_failure_exits_with_two(capsys, tmp_path):
    free = tmp_path / "free.json"
    free.write_text(json.dumps({"r": 1, "generators": [{"name": "e", "degree": 0}], "differential": [["0"]]}))
    code, out, _ = run(capsys, "rank-check", "--module", free)
    assert code == 2
    assert json.loads(out)["verdict"] == WINDOW_FAILURE

    code, out, _ = run(capsys, "rank-check", "--random", "1", "3", "5", "--count", "2")
    assert code == 2
    assert [row["verdict"] for row in json.loads(out)] == [WINDOW_FAILURE] * 2


def test_rank_check_batch(capsys):
    code, out, _ = run(capsys, "rank-check", "--random", "2", "0", "5", "--family", "regular", "--count", "3")
    assert code == 0
    assert [row["seed"] for row in json.loads(out)] == [5, 6, 7]

    code, _, _ = run(capsys, "rank-check", "--random", "2")
    assert code == 1


def test_operad_basis(capsys):
    code, out, _ = run(capsys, "operad-basis", "2", "1")
    assert code == 0
    table = json.loads(out)
    assert table["size"] == 4
    assert table["matches_rewriting"]
    assert table["elements"][0] == "(mu, mu)"


def test_operad_basis_bounds(capsys):
    code, _, err = run(capsys, "operad-basis", "9", "4")
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["error"] == "BoundsExceededError"


def test_operad_koszul_table(capsys):
    code, out, _ = run(capsys, "operad-koszul", "2", "3", "1", "--operad", "as")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 6
    assert all(row["koszul_dual_dim"] == 1 for row in rows if row["arity"] == row["weight"] + 1)


@pytest.mark.parametrize("without, passed", [(None, True), ("associate", False), ("commute", False)])
def test_pbw(capsys, without, passed):
    argv = ["pbw", "2", "2"] + (["--without", without] if without else [])
    code, out, _ = run(capsys, *argv)
    assert code == (0 if passed else 3)
    report = json.loads(out)
    assert report["passed"] is passed
    assert (report["failure_count"] > 0) is not passed


def test_euler(capsys):
    code, out, _ = run(capsys, "euler", "--builtin", "torus", "--rank", "2")
    assert code == 0
    report = json.loads(out)
    assert report["identity_holds"]
    assert report["group_order"] == 4
