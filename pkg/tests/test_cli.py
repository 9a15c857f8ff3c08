"""Command line driver: exit codes, output determinism, file formats.

Everything runs in-process through main(argv) so capsys sees the
output; one case goes through a real subprocess to pin down that the
installed entry point emits byte-identical text.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from bowlab.cli import main
from bowlab.diagrams import diagram_from_json_dict, parse_bow_diagram, serialize
from bowlab.total_space import moment_residual, point_from_json_dict

CANONICAL = "bow {\n  wavy s [1, 1, 1];\n}\n"
EMPTY_252 = "bow { wavy a [2]; wavy b [5, 2]; edge a -> b; }"


@pytest.fixture
def diagram_file(tmp_path):
    path = tmp_path / "chain.bow"
    path.write_text(CANONICAL, encoding="utf-8")
    return str(path)


@pytest.fixture
def empty_file(tmp_path):
    path = tmp_path / "empty.bow"
    path.write_text(EMPTY_252, encoding="utf-8")
    return str(path)


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# --- parse ---------------------------------------------------------------------


def test_parse_prints_canonical_dsl(capsys, tmp_path):
    scruffy = tmp_path / "scruffy.bow"
    scruffy.write_text("bow{wavy s[1,1,1];}", encoding="utf-8")
    code, out, _ = run_cli(capsys, ["parse", str(scruffy), "--dsl"])
    assert code == 0
    assert out == CANONICAL


def test_parse_json_round_trips(capsys, diagram_file):
    code, out, _ = run_cli(capsys, ["parse", diagram_file])
    assert code == 0
    d = diagram_from_json_dict(json.loads(out))
    assert serialize(d) == CANONICAL


def test_parse_rejects_bad_syntax(capsys, tmp_path):
    bad = tmp_path / "bad.bow"
    bad.write_text("bow { wavy s [1, 1] }", encoding="utf-8")
    code, _, err = run_cli(capsys, ["parse", str(bad)])
    assert code == 1
    assert "error:" in err


def test_missing_file_is_an_error(capsys, tmp_path):
    code, _, err = run_cli(capsys, ["parse", str(tmp_path / "absent.bow")])
    assert code == 1
    assert "error:" in err


# --- solve ----------------------------------------------------------------------


def test_solve_outputs_are_byte_identical(capsys, diagram_file):
    argv = ["solve", diagram_file, "--lambda", "0.9", "--seed", "3", "--starts", "8"]
    code1, out1, _ = run_cli(capsys, argv)
    code2, out2, _ = run_cli(capsys, argv)
    assert code1 == code2 == 0
    assert out1 == out2

    proc = subprocess.run([sys.executable, "-m", "bowlab.cli", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == out1


def test_solve_report_contents(capsys, diagram_file):
    code, out, _ = run_cli(capsys, ["solve", diagram_file, "--lambda", "1.0+0.5j",
                                    "--seed", "1", "--starts", "8"])
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "solved"
    assert data["open_conditions_ok"] is True
    assert data["seed"] == 1
    assert data["residual_norm"] < 1e-10
    d = parse_bow_diagram(CANONICAL)
    p = point_from_json_dict(d, data["point"])
    from bowlab.diagrams import embed_deformation

    nu = embed_deformation(d, {"s": 1.0 + 0.5j})
    assert np.linalg.norm(moment_residual(d, p, nu)) < 1e-9


def test_solve_failure_exits_one(capsys, empty_file):
    code, out, _ = run_cli(capsys, ["solve", empty_file, "--starts", "3"])
    assert code == 1
    data = json.loads(out)
    assert data["status"] == "no-open-solution"
    assert data["note"] == "evidence, not proof"
    assert data["n_starts"] == 3 and len(data["starts"]) == 3


def test_solve_table_format(capsys, diagram_file):
    code, out, _ = run_cli(capsys, ["solve", diagram_file, "--lambda", "0.7",
                                    "--starts", "8", "--format", "table"])
    assert code == 0
    assert out.startswith("solved: residual ")


def test_lambda_count_mismatch_is_usage_error(capsys, diagram_file):
    with pytest.raises(SystemExit) as exc:
        main(["solve", diagram_file, "--lambda", "1.0,2.0"])
    assert exc.value.code == 2


def test_seed_env_default(capsys, diagram_file, monkeypatch):
    monkeypatch.setenv("BOWLAB_SEED", "11")
    code, out, _ = run_cli(capsys, ["solve", diagram_file, "--lambda", "0.4",
                                    "--starts", "8"])
    assert code == 0
    assert json.loads(out)["seed"] == 11


# --- stability / dim / reduce pipeline ----------------------------------------------


def _solved_point_file(capsys, tmp_path, diagram_file, lam="0.8"):
    _, out, _ = run_cli(capsys, ["solve", diagram_file, "--lambda", lam,
                                 "--seed", "0", "--starts", "8"])
    path = tmp_path / "point.json"
    path.write_text(out, encoding="utf-8")
    return str(path)


def test_stability_accepts_solve_report(capsys, tmp_path, diagram_file):
    point = _solved_point_file(capsys, tmp_path, diagram_file)
    code, out, _ = run_cli(capsys, ["stability", diagram_file, point,
                                    "--theta", "1", "--mode", "exact01"])
    assert code == 0
    data = json.loads(out)
    assert data["kind"] == "semistable"
    assert data["clause"] is None and data["witness"] is None

    code, out, _ = run_cli(capsys, ["stability", diagram_file, point,
                                    "--theta", "1", "--mode", "exact01",
                                    "--format", "table"])
    assert code == 0
    assert "semistable check (exact01): semistable" in out


def test_stability_reports_witness(capsys, tmp_path):
    # unframed identity-A chain: the full space destabilizes at theta > 0
    d_path = tmp_path / "chain.bow"
    d_path.write_text(CANONICAL, encoding="utf-8")
    point = {
        "triangles": {"s": [
            {"v1": 1, "v2": 1,
             "A": [[[1.0, 0.0]]], "B1": [[[0.0, 0.0]]], "B2": [[[0.0, 0.0]]],
             "a": [[[0.0, 0.0]]], "b": [[[0.0, 0.0]]]}
            for _ in range(2)]},
        "edges": [],
    }
    p_path = tmp_path / "flat.json"
    p_path.write_text(json.dumps(point), encoding="utf-8")
    code, out, _ = run_cli(capsys, ["stability", str(d_path), str(p_path),
                                    "--theta", "1", "--mode", "exact01"])
    assert code == 0
    data = json.loads(out)
    assert data["kind"] == "unstable" and data["clause"] == "kernel"
    assert set(data["witness"]) == {"s:0", "s:1", "s:2"}
    assert all(w["dim"] == 1 for w in data["witness"].values())


def test_dim_prints_number(capsys, diagram_file, empty_file):
    code, out, _ = run_cli(capsys, ["dim", diagram_file])
    assert code == 0 and out == "2\n"
    code, out, _ = run_cli(capsys, ["dim", empty_file])
    assert code == 0 and out == "-10\n"


def test_reduce_pipeline(capsys, tmp_path, diagram_file):
    point = _solved_point_file(capsys, tmp_path, diagram_file, lam="1.1")
    code, out, _ = run_cli(capsys, ["reduce", diagram_file, point])
    assert code == 0
    data = json.loads(out)
    assert data["v"] == {"s": 1}
    assert data["w"] == {"s": 2}
    # framed moment of the image: IJ = lambda at the single vertex
    I = np.array([[complex(re, im) for re, im in row] for row in data["I"]["s"]])
    J = np.array([[complex(re, im) for re, im in row] for row in data["J"]["s"]])
    assert abs((I @ J)[0, 0] - 1.1) < 1e-9


def test_reduce_table_format(capsys, tmp_path, diagram_file):
    point = _solved_point_file(capsys, tmp_path, diagram_file, lam="1.1")
    code, out, _ = run_cli(capsys, ["reduce", diagram_file, point,
                                    "--format", "table"])
    assert code == 0
    assert out.startswith("vertex s: v=1, w=2, |I|=")
    assert "arrow" not in out  # no edges on the chain


def test_reduce_rejects_off_level_points(capsys, tmp_path, diagram_file, empty_file):
    point = _solved_point_file(capsys, tmp_path, diagram_file)
    code, _, err = run_cli(capsys, ["reduce", empty_file, point])
    assert code == 1
    assert "error:" in err


# --- check-empty -----------------------------------------------------------------


def test_check_empty_with_evidence(capsys, empty_file):
    code, out, _ = run_cli(capsys, ["check-empty", empty_file, "--starts", "3"])
    assert code == 0
    data = json.loads(out)
    assert data["necessary_condition"] == "pass"
    assert data["violations"] == []
    ev = data["solver_evidence"]
    assert ev["found_solution"] is False
    assert ev["failed_starts"] == 3
    assert ev["note"] == "evidence, not proof"

    code, out, _ = run_cli(capsys, ["check-empty", empty_file, "--starts", "3",
                                    "--format", "table"])
    assert code == 0
    assert out == "necessary condition: pass; solver evidence: 3/3 starts failed\n"


def test_check_empty_reports_violations(capsys, tmp_path):
    path = tmp_path / "lop.bow"
    path.write_text("bow { wavy a [5, 1]; }", encoding="utf-8")
    code, out, _ = run_cli(capsys, ["check-empty", str(path)])
    assert code == 0
    data = json.loads(out)
    assert data["necessary_condition"] == "fail"
    assert len(data["violations"]) == 1
    v = data["violations"][0]
    assert v["interval"] == "a" and v["v0"] == 5 and v["v0"] > v["bound"]
    assert data["solver_evidence"] is None


def test_check_empty_finds_solutions_when_feasible(capsys, diagram_file):
    code, out, _ = run_cli(capsys, ["check-empty", diagram_file, "--starts", "3",
                                    "--lambda", "0.6"])
    assert code == 0
    assert json.loads(out)["solver_evidence"]["found_solution"] is True


# --- selftest --------------------------------------------------------------------


def test_selftest_passes(capsys):
    code, out, _ = run_cli(capsys, ["selftest"])
    assert code == 0
    assert "self-test passed" in out
    assert "FAIL" not in out
