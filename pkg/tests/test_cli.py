import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hypoindex import MatrixFile, dump_matrix_file, load_matrix_file
from hypoindex.cli import main, shipped_corpus

CORPUS = shipped_corpus()


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def write(tmp_path, name, M, **kw):
    path = tmp_path / f"{name}.json"
    dump_matrix_file(MatrixFile(name, np.asarray(M, complex), **kw), path)
    return path


class TestReportEnvelope:
    def test_fields(self, capsys):
        code, rep = run_json(capsys, "classify", CORPUS / "identity.json")
        assert code == 0 and rep["status"] == "ok" and rep["exit_code"] == 0
        assert rep["schema_version"] == "1.0" and rep["command"] == "classify"
        assert rep["input"]["name"] == "identity" and len(rep["input"]["sha256"]) == 64
        assert rep["tolerances"]["tol_rank_effective"] == pytest.approx(3 * 2.0 ** -40)

    def test_deterministic_apart_from_timestamp(self, capsys):
        _, a = run_json(capsys, "index", CORPUS / "dissipative_chain_generator.json")
        _, b = run_json(capsys, "index", CORPUS / "dissipative_chain_generator.json")
        a.pop("generated_at"), b.pop("generated_at")
        assert a == b

    def test_pretty(self, capsys):
        code, out = run(capsys, "index", CORPUS / "rotation_envelope_generator.json", "--which", "hc", "--pretty")
        assert code == 0
        lines = dict(line.split(None, 1) for line in out.splitlines())
        assert lines["indices.hc.m"] == "1"
        assert not any("audit" in k for k in lines)

    def test_report_file(self, capsys, tmp_path):
        target = tmp_path / "r.json"
        run(capsys, "classify", CORPUS / "zero.json", "--report", target)
        assert json.loads(target.read_text())["command"] == "classify"


class TestCommands:
    def test_classify_modes(self, capsys):
        _, rep = run_json(capsys, "classify", CORPUS / "indefinite_hermitian_part_system.json")
        cont = rep["classification"]["continuous"]
        assert cont["asymptotically_stable"] and not cont["semi_dissipative"] and cont["mu"] == pytest.approx(1)
        _, rep = run_json(capsys, "classify", CORPUS / "identity.json", "--mode", "discrete")
        assert set(rep["classification"]) == {"discrete"}

    def test_index_kinds(self, capsys):
        _, rep = run_json(capsys, "index", CORPUS / "unstable_generator.json", "--which", "shc")
        assert rep["indices"]["shc"]["lambda_min"] == pytest.approx(-1) and rep["indices"]["shc"]["m"] == 1
        _, rep = run_json(capsys, "index", CORPUS / "double_upper_shift.json", "--which", "dshc")
        assert rep["indices"]["dshc"]["sigma_max"] == pytest.approx(2) and rep["indices"]["dshc"]["m"] == 2

    def test_index_precondition_exit(self, capsys):
        code, rep = run_json(capsys, "index", CORPUS / "unstable_generator.json", "--which", "hc")
        assert code == 2 and rep["status"] == "failed"
        assert "shifted_hc_index" in rep["indices"]["hc"]["error"]

    def test_index_all_records_preconditions(self, capsys):
        code, rep = run_json(capsys, "index", CORPUS / "unstable_generator.json")
        assert code == 0 and "error" in rep["indices"]["hc"] and rep["indices"]["shc"]["m"] == 1

    def test_negate(self, capsys):
        _, rep = run_json(capsys, "index", CORPUS / "dissipative_chain_system.json", "--which", "hc", "--negate")
        assert rep["indices"]["hc"]["m"] == 2

    def test_witness(self, capsys):
        _, rep = run_json(capsys, "index", CORPUS / "imaginary_eigenvalue_generator.json", "--which", "hc")
        hc = rep["indices"]["hc"]
        assert not hc["exists"] and len(hc["witness"]) == 2

    def test_cayley_output_file(self, capsys, tmp_path):
        out = tmp_path / "img.json"
        code, rep = run_json(capsys, "cayley", CORPUS / "dissipative_chain_system.json", "-o", out)
        assert code == 0 and rep["cayley"]["preservation"] == {"m_hc": 2, "m_dhc": 2, "equal": True}
        img = load_matrix_file(out)
        expected = np.array([[1, -4, 2, 0], [4, -1, -2, 0], [2, 2, -1, 0], [0, 0, 0, 0]]) / 5
        assert np.abs(img.matrix - expected).max() <= 1e-12 and img.kind_hint == "discrete"

    def test_cayley_zero(self, capsys, tmp_path):
        out = tmp_path / "img.json"
        run(capsys, "cayley", CORPUS / "zero.json", "-o", out)
        assert np.allclose(load_matrix_file(out).matrix, np.eye(load_matrix_file(out).n))

    def test_inverse_cayley(self, capsys):
        _, rep = run_json(capsys, "cayley", CORPUS / "double_upper_shift.json", "--direction", "d2c")
        img = np.array(rep["cayley"]["image"])
        img = img[..., 0] + 1j * img[..., 1]
        assert np.abs(img - [[-1, 4, -8], [0, -1, 4], [0, 0, -1]]).max() <= 1e-12

    def test_cayley_pole(self, capsys):
        code, rep = run_json(capsys, "cayley", CORPUS / "identity.json")
        assert code == 2 and rep["blocking_eigenvalue"] == [1.0, 0.0]

    def test_decay_csv(self, capsys, tmp_path):
        target = tmp_path / "d.csv"
        code, rep = run_json(capsys, "decay", CORPUS / "rotation_envelope_generator.json", "--csv", target)
        assert code == 0 and rep["decay"]["pass"] and abs(rep["decay"]["a_est"] - 3) <= 0.2
        with open(target, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "norm", "shifted_norm"] and len(rows) == 26
        assert all(0 < float(r[1]) < 1 for r in rows[1:])

    def test_decay_discrete(self, capsys):
        _, rep = run_json(capsys, "decay", CORPUS / "upper_shift.json", "--mode", "discrete")
        assert rep["decay"]["profile"] == pytest.approx([1, 1, 0, 0]) and rep["decay"]["pass"]

    def test_decay_fit_failure(self, capsys, tmp_path):
        path = write(tmp_path, "tiny", 1e-20 * np.eye(2))
        code, rep = run_json(capsys, "decay", path)
        assert code == 3 and "window" in rep["error"]

    def test_lyapunov(self, capsys, tmp_path):
        rhs = write(tmp_path, "w", [[2.0, -1.0], [-1.0, 2.0]])
        code, rep = run_json(capsys, "lyapunov", CORPUS / "rotation_envelope_generator.json",
                             "--negate", "--rhs", rhs)
        P = np.array(rep["lyapunov"]["P"])[..., 0]
        assert code == 0 and np.allclose(P, [[2, -1], [-1, 2]])
        assert rep["lyapunov"]["cayley_map"]["residual_d"] <= 1e-12

    def test_stein(self, capsys, tmp_path):
        path = write(tmp_path, "half", 0.5 * np.eye(2))
        _, rep = run_json(capsys, "lyapunov", path, "--kind", "discrete")
        assert np.allclose(np.array(rep["lyapunov"]["P"])[..., 0], 4 / 3 * np.eye(2))


class TestInputErrors:
    def test_missing_file(self, capsys, tmp_path):
        code, rep = run_json(capsys, "classify", tmp_path / "nope.json")
        assert code == 1 and rep["status"] == "error"

    def test_bad_json_location(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x",\n "entries": [[1, 2]')
        code, rep = run_json(capsys, "classify", path)
        assert code == 1 and "line" in rep["error"]

    def test_non_square(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({"name": "r", "entries": [[1, 2]]}))
        assert run(capsys, "classify", path)[0] == 1

    def test_csv_input(self, capsys, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,-1\n1,0\n")
        _, rep = run_json(capsys, "index", path, "--which", "hc")
        assert rep["indices"]["hc"]["m"] == 1


class TestTolerances:
    def test_env_profile(self, capsys, monkeypatch):
        monkeypatch.setenv("HYPOINDEX_TOL_PROFILE", "loose")
        _, rep = run_json(capsys, "classify", CORPUS / "zero.json")
        from hypoindex import TOLERANCE_PRESETS
        assert rep["tolerances"]["tol_psd"] == TOLERANCE_PRESETS["loose"].tol_psd

    def test_unknown_env_profile(self, capsys, monkeypatch):
        monkeypatch.setenv("HYPOINDEX_TOL_PROFILE", "nope")
        assert run(capsys, "classify", CORPUS / "zero.json")[0] == 1

    def test_config_then_flags(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tol_psd": 1e-8, "tol_sym": 1e-9}))
        _, rep = run_json(capsys, "classify", CORPUS / "zero.json", "--config", cfg, "--tol-psd", "1e-7")
        assert rep["tolerances"]["tol_psd"] == 1e-7 and rep["tolerances"]["tol_sym"] == 1e-9

    def test_config_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tol_bogus": 1}))
        assert run(capsys, "classify", CORPUS / "zero.json", "--config", cfg)[0] == 1


class TestSuite:
    def test_shipped_corpus_passes(self, capsys):
        code, rep = run_json(capsys, "suite", "--jobs", "4")
        counts = rep["suite"]["counts"]
        assert code == 0 and counts == {"pass": len(list(CORPUS.glob("*.json"))), "fail": 0, "error": 0}

    def test_empty_directory(self, capsys, tmp_path):
        code, rep = run_json(capsys, "suite", tmp_path)
        assert code == 0 and rep["suite"]["counts"]["pass"] == 0

    def test_corrupted_file_is_isolated(self, capsys, tmp_path):
        for p in list(CORPUS.glob("*.json"))[:3]:
            (tmp_path / p.name).write_text(p.read_text())
        (tmp_path / "broken.json").write_text("{")
        code, rep = run_json(capsys, "suite", tmp_path)
        bad = [f for f in rep["suite"]["files"] if f["status"] != "pass"]
        assert code == 1 and [f["file"] for f in bad] == ["broken.json"]

    def test_failed_expectation(self, capsys, tmp_path):
        write(tmp_path, "wrong", [[1.0, -1.0], [1.0, 0.0]], expect={"indices.hc.m": 0})
        code, rep = run_json(capsys, "suite", tmp_path)
        assert code == 4 and rep["suite"]["counts"]["fail"] == 1

    def test_pretty_summary(self, capsys):
        code, out = run(capsys, "suite", "--pretty")
        assert code == 0 and "pass   upper_shift.json" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hypoindex.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "hypoindex" in proc.stdout
