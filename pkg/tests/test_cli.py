import csv
import io
import json
import subprocess
import sys

import pytest

from hcgibbs.cli import EXIT_BUDGET, EXIT_CERT, EXIT_INVALID, EXIT_OK, main
from hcgibbs.reports import SWEEP_COLUMNS, sweep_from_csv, sweep_to_csv

from oracles import stick_lambda_one


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_stick(capsys):
    code, out, _ = run(capsys, "solve", "--graph", "stick", "--k", "2", "--lambda", "1", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["z0"] == pytest.approx(1.0, abs=1e-12)
    assert doc["z1"] == pytest.approx(stick_lambda_one(), rel=1e-13)
    assert doc["residual"] < 1e-12
    assert doc["certified"] is True


def test_solve_text(capsys):
    code, out, _ = run(capsys, "solve", "--graph", "gun", "--a", "1")
    assert code == EXIT_OK
    assert "certified unique" in out and out.startswith("graph=gun")


def test_solve_uncertified_paths(capsys):
    code, out, _ = run(capsys, "solve", "--graph", "key", "--k", "3", "--lambda", "2", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["certified"] is False


def test_solve_custom_graph_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"name": "path", "edges": [[0, 1], [1, 2], [2, 3]]}))
    code, out, _ = run(capsys, "solve", "--graph-file", str(path), "--lambda", "1", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["graph"] == "path" and doc["certified"] is False and doc["residual"] < 1e-9


def test_certify_json(capsys):
    code, out, _ = run(capsys, "certify", "--graph", "gun", "--a", "2")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["certified_count"] == 1 and doc["ok"] is True
    assert doc["coefficient_discrepancy"]["coincide"] is False
    assert any("discrepancy" in n for n in doc["notes"])


def test_certify_rejects_k3(capsys):
    code, _, err = run(capsys, "certify", "--graph", "key", "--k", "3", "--a", "1")
    assert code == EXIT_INVALID
    assert err.startswith("error: invalid configuration")


def test_poly_key(capsys):
    code, out, _ = run(capsys, "poly", "--graph", "key", "--a", "1", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["coefficients_desc"] == ["2/1", "-1/1", "-4/1", "-6/1", "2/1", "4/1", "0/1", "-1/1"]
    assert doc["descartes"] == 3
    assert doc["sturm"]["positive_root_count"] == 1


def test_poly_text_and_printed(capsys):
    code, out, _ = run(capsys, "poly", "--graph", "gun", "--a", "2", "--printed")
    assert code == EXIT_OK
    assert "polynomial=gun-printed" in out
    assert "descartes=" in out and "sturm=" in out


def test_poly_custom_coefficients(capsys):
    code, out, _ = run(capsys, "poly", "--coeffs", '["1", "0", "-2"]', "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["sturm"]["positive_root_count"] == 1
    assert doc["positive_roots"][0] == pytest.approx(2**0.5, rel=1e-15)


@pytest.mark.parametrize("argv", [
    ("poly", "--coeffs", '["0"]'),
    ("poly", "--coeffs", '["x"]'),
    ("poly", "--graph", "key"),
])
def test_poly_invalid(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_INVALID


def test_figures(capsys):
    code, out, _ = run(capsys, "figures", "--graph", "gun", "--points", "100")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 100
    assert all(float(r["g_min"]) < 0 and float(r["g_max"]) < 0 for r in rows)
    assert all(r["schema_version"] == "1" for r in rows)


def test_oracle_json(capsys):
    code, out, _ = run(capsys, "oracle", "--graph", "key", "--lambda", "1", "--n", "2")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["admissible_count"] == 5852
    assert doc["consistency_discrepancy"] < 1e-10
    assert sum(doc["root_marginal"]) == pytest.approx(1, abs=1e-12)


def test_oracle_explicit_boundary(capsys):
    code, out, _ = run(capsys, "oracle", "--graph", "stick", "--lambda", "1", "--boundary", "1,1,1")
    assert code == EXIT_OK
    assert json.loads(out)["consistency_discrepancy"] > 1e-3


def test_oracle_budget(capsys):
    code, _, err = run(capsys, "oracle", "--graph", "gun", "--lambda", "1", "--n", "4")
    assert code == EXIT_BUDGET
    assert "budget" in err


def test_oracle_bad_boundary(capsys):
    code, _, _ = run(capsys, "oracle", "--graph", "gun", "--lambda", "1", "--boundary", "1,-2,3")
    assert code == EXIT_INVALID


def test_sweep_csv_roundtrip(capsys):
    code, out, _ = run(capsys, "sweep", "--graph", "gun", "--min", "1/2", "--max", "2",
                       "--points", "5", "--grid", "64")
    assert code == EXIT_OK
    rows = sweep_from_csv(out)
    assert len(rows) == 5
    assert all(r.count == 1 for r in rows)
    assert sweep_to_csv(rows) == out
    assert out.splitlines()[0] == ",".join(SWEEP_COLUMNS)


def test_sweep_linear_and_workers(capsys):
    args = ("sweep", "--graph", "key", "--min", "1", "--max", "3", "--points", "3",
            "--spacing", "linear", "--grid", "32")
    code, serial, _ = run(capsys, *args)
    code2, parallel, _ = run(capsys, *args, "--workers", "2")
    assert code == code2 == EXIT_OK
    assert serial == parallel
    assert [r.a for r in sweep_from_csv(serial)] == [1, 2, 3]


@pytest.mark.parametrize("argv", [
    ("sweep", "--min", "2", "--max", "1"),
    ("sweep", "--points", "1"),
    ("sweep", "--k", "3"),
])
def test_sweep_invalid(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_INVALID


def test_deterministic_output(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["certify", "--graph", "key", "--a", "3/7", "-o", str(path)]) == EXIT_OK
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HCGIBBS_OUTPUT_DIR", str(tmp_path / "out"))
    assert main(["figures", "--points", "4"]) == EXIT_OK
    _, err = capsys.readouterr()
    assert (tmp_path / "out" / "figures.csv").exists()
    assert "wrote" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["solve", "--a", "1", "--lambda", "1"])
    assert info.value.code == EXIT_INVALID
    with pytest.raises(SystemExit) as info:
        main(["solve", "--a", "abc"])
    assert info.value.code == EXIT_INVALID


@pytest.mark.parametrize("value", ["0", "-1"])
def test_nonpositive_activity(capsys, value):
    code, _, _ = run(capsys, "solve", "--lambda", value)
    assert code == EXIT_INVALID


def test_bad_graph_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"name": "x", "edges": [[0, 7]]}')
    assert run(capsys, "solve", "--graph-file", str(path), "--lambda", "1")[0] == EXIT_INVALID
    assert run(capsys, "solve", "--graph-file", str(tmp_path / "missing.json"), "--lambda", "1")[0] == EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hcgibbs", "poly", "--graph", "key", "--a", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "sturm=1" in proc.stdout


def test_exit_code_constants():
    assert (EXIT_OK, EXIT_INVALID, EXIT_CERT, EXIT_BUDGET) == (0, 2, 3, 4)
