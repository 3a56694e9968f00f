import csv
import io
import json
import math

import pytest

from yamabe_lab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


class TestBounds:
    def test_cp2_exact(self, capsys):
        code, out, _ = run(capsys, "bounds", "--k", "1", "--m", "3")
        (row,) = json.loads(out)["rows"]
        assert code == 0
        assert row["exact"] is True
        assert row["lower"] == row["upper"] == pytest.approx(12 * math.sqrt(2) * math.pi, rel=1e-12)
        assert row["lower_exact"] == "12*sqrt(2)*pi"

    def test_k2(self, capsys):
        _, out, _ = run(capsys, "bounds", "--k", "2", "--m", "0")
        (row,) = json.loads(out)["rows"]
        assert row["exact"] is False
        assert row["upper"] == pytest.approx(8 * math.sqrt(5) * math.pi, rel=1e-12)
        assert row["upper_exact"] == "8*sqrt(5)*pi"

    def test_grid_of_rows_is_ordered(self, capsys):
        _, out, _ = run(capsys, "bounds", "--k", "3", "--k", "1", "--m", "0", "--m", "2")
        names = [r["name"] for r in json.loads(out)["rows"]]
        assert names == ["3CP2#0(S1xS3)", "3CP2#2(S1xS3)", "CP2#0(S1xS3)", "CP2#2(S1xS3)"]

    def test_hopf_pair(self, capsys):
        _, out, _ = run(capsys, "bounds", "--name", "hopf-blowup-pair")
        rows = json.loads(out)["rows"]
        assert len(rows) == 2
        assert rows[0]["lower"] == pytest.approx(8 * math.sqrt(6) * math.pi, rel=1e-12)
        assert rows[1]["lower"] == pytest.approx(12 * math.sqrt(2) * math.pi, rel=1e-12)

    def test_unknown_name(self, capsys):
        code, out, err = run(capsys, "bounds", "--name", "K3")
        assert code == 2 and out == ""
        assert "known:" in err and "hopf-surface" in err

    def test_bad_k(self, capsys):
        code, _, err = run(capsys, "bounds", "--k", "7")
        assert code == 2 and "k must be" in err

    def test_csv(self, capsys):
        _, out, _ = run(capsys, "bounds", "--k", "2", "--format", "csv")
        (row,) = list(csv.DictReader(io.StringIO(out)))
        assert row["exact"] == "False"
        assert float(row["upper"]) == pytest.approx(56.1985, abs=1e-4)
        assert "connected-sum" in row["provenance"]

    def test_byte_identical(self, capsys):
        outs = {run(capsys, "bounds", "--k", "1", "--k", "2", "--k", "3")[1] for _ in range(3)}
        assert len(outs) == 1


class TestSpectrum:
    def test_flat_unperturbed(self, capsys, tmp_path):
        code, out, _ = run(capsys, "spectrum", write_config(tmp_path, {"N": 8, "u": "1", "f": "0"}))
        doc = json.loads(out)
        assert code == 0
        assert set(doc) == {"N", "lambda", "residual", "sign"}
        assert abs(doc["lambda"]) < 1e-10 and doc["sign"] == "0"

    def test_constant_potential(self, capsys, tmp_path):
        _, out, _ = run(capsys, "spectrum", write_config(tmp_path, {"N": 8, "u": 1, "f": 1}))
        doc = json.loads(out)
        assert doc["lambda"] == pytest.approx(-1.0, abs=1e-10)
        assert doc["sign"] == "-"

    def test_bumpy_factor_ground_state(self, capsys, tmp_path):
        cfg = {"N": 16, "u": "1+0.2cos(2pi x1)", "f": "0", "compare_u_inverse": True}
        _, out, _ = run(capsys, "spectrum", write_config(tmp_path, cfg))
        doc = json.loads(out)
        assert doc["sign"] == "0"
        assert doc["u_inverse_deviation"] < 1e-8

    def test_bumpy_factor_stencil(self, capsys, tmp_path):
        cfg = {"N": 16, "u": "1+0.2cos(2pi x1)", "scheme": "stencil", "compare_u_inverse": True}
        _, out, _ = run(capsys, "spectrum", write_config(tmp_path, cfg))
        doc = json.loads(out)
        assert doc["u_inverse_deviation"] < 0.01

    def test_determinism_and_csv(self, capsys, tmp_path):
        path = write_config(tmp_path, {"N": 6, "u": "1+0.1sin(2pi x3)", "f": "-1"})
        first, second = run(capsys, "spectrum", path)[1], run(capsys, "spectrum", path)[1]
        assert first == second
        _, out, _ = run(capsys, "spectrum", path, "--format", "csv")
        (row,) = list(csv.DictReader(io.StringIO(out)))
        assert row["sign"] == "+"

    @pytest.mark.parametrize("doc, needle", [
        ('{"N": 8,\n "u": 1,,}', "cfg.json:2:"),
        ("[1, 2]", "JSON object"),
        ({"N": 1}, "'N'"),
        ({"N": 8.5}, "'N'"),
        ({"N": 8, "q": 1}, "unknown field"),
        ({"N": 8, "tol": -1}, "'tol'"),
        ({"N": 8, "scheme": "spectral"}, "'scheme'"),
        ({"N": 8, "u": "1+"}, "field 'u'"),
        ({"N": 8, "f": "cos(x9)"}, "column"),
        ({"N": 8, "u": "cos(2pi x1)"}, "positive"),
        ({"N": 8, "u": True}, "field 'u'"),
        ({"N": 8, "solver": {"max_iter": 0}}, "'solver'"),
        ({"N": 8, "solver": {"bogus": 1}}, "'solver'"),
    ])
    def test_config_errors(self, capsys, tmp_path, doc, needle):
        code, out, err = run(capsys, "spectrum", write_config(tmp_path, doc))
        assert code == 2 and out == ""
        assert needle in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "spectrum", str(tmp_path / "nope.json"))
        assert code == 2 and "cannot read" in err

    def test_solver_failure_exit_code(self, capsys, tmp_path):
        cfg = {"N": 8, "u": "1+0.3cos(2pi x2)", "f": "cos(2pi x1)", "tol": 1e-14, "solver": {"max_iter": 1}}
        code, out, err = run(capsys, "spectrum", write_config(tmp_path, cfg))
        assert code == 1 and out == "" and "residual" in err


class TestVerify:
    @pytest.mark.parametrize("suite", ["constants", "lattice", "algebra"])
    def test_fast_suites_pass(self, capsys, suite):
        code, out, err = run(capsys, "verify", suite)
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and doc["n_failed"] == 0
        assert doc["suite"] == suite
        assert err.count("PASS") == doc["n_checks"]

    def test_unknown_suite(self, capsys):
        code, _, err = run(capsys, "verify", "everything")
        assert code == 2 and "algebra" in err

    def test_failure_gives_nonzero_exit(self, capsys, monkeypatch):
        from yamabe_lab import verification
        bad = verification.Check("forced", False, {})
        monkeypatch.setitem(verification.SUITES, "constants", [lambda: bad])
        code, out, err = run(capsys, "verify", "constants")
        assert code == 1 and not json.loads(out)["passed"] and "FAIL  forced" in err

    def test_jobs_do_not_change_output(self, capsys):
        serial = run(capsys, "verify", "algebra", "--jobs", "1")[1]
        parallel = run(capsys, "verify", "algebra", "--jobs", "3")[1]
        assert serial == parallel

    def test_threads_env_default(self, monkeypatch):
        monkeypatch.setenv("YAMABE_LAB_THREADS", "4")
        assert cli.default_jobs() == 4
        monkeypatch.setenv("YAMABE_LAB_THREADS", "lots")
        assert cli.default_jobs() == 1

    def test_csv(self, capsys):
        _, out, _ = run(capsys, "verify", "constants", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows and all(r["passed"] == "True" for r in rows)


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "yamabe_lab", "bounds", "--name", "S4"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["rows"][0]["name"] == "S4"
