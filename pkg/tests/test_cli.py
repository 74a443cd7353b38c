import csv
import io
import json
import subprocess
import sys

import pytest

from bcjacobi.cli import dumps, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_poly_worked_row(capsys):
    code, out = run(["poly", "--q", "1", "--d", "2", "--mu", "2", "--lambda", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    row = doc["results"][0]
    coeffs = {tuple(mu): c for mu, c in row["coefficients"]}
    assert coeffs[(0,)] == pytest.approx(2 / 3, abs=1e-9)
    assert row["c_value"] == pytest.approx(3 / 8, abs=1e-12)
    assert row["plancherel_weight"] == pytest.approx(2, abs=1e-8)
    assert set(doc) == {"config", "results", "environment"}
    assert doc["environment"]["rng"] == "numpy.random.PCG64"


def test_poly_zero_weight(capsys):
    code, out = run(["poly", "--q", "2", "--d", "1", "--mu", "2.2", "--lambda", "0,0"], capsys)
    row = json.loads(out)["results"][0]
    assert code == 0 and row["coefficients"] == [[[0, 0], 1]]


@pytest.mark.parametrize(
    "argv",
    [
        ["poly", "--q", "2", "--d", "2", "--mu", "4", "--lambda", "2,4"],
        ["poly", "--q", "2", "--d", "2", "--mu", "4", "--lambda", "3,1"],
        ["poly", "--q", "2", "--d", "2", "--mu", "4", "--lambda", "2"],
        ["poly", "--q", "2", "--d", "3", "--mu", "4"],
        ["poly", "--q", "2", "--d", "2", "--mu", "1"],
        ["poly", "--d", "2", "--mu", "4"],
        ["convolve", "--q", "2", "--d", "2", "--mu", "4", "--x", "1,2", "--y", "0,0", "--seed", "1"],
        ["convolve", "--q", "2", "--d", "2", "--mu", "4", "--x", "1,0.2", "--y", "0.3,0"],
        ["verify", "--q", "1", "--d", "2", "--mu", "2", "--suite", "bogus", "--seed", "1"],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_ill_conditioned_exit(capsys, monkeypatch):
    import bcjacobi.jacobi as jac

    monkeypatch.setattr(jac, "DEFAULT_CONDITION_BOUND", 1.0)
    monkeypatch.setattr(jac.gram_schmidt, "__defaults__", (1.0,))
    jac.clear_cache()
    try:
        code = main(["poly", "--q", "2", "--d", "2", "--mu", "4", "--lambda", "4,2"])
    finally:
        jac.clear_cache()
    assert code == 1


def test_convolve_point_mass_csv(capsys):
    code, out = run(["convolve", "--q", "2", "--d", "1", "--mu", "2.2", "--x", "1,0.3", "--y", "0,0",
                     "--seed", "4", "--format", "csv"], capsys)
    assert code == 0
    body = [l for l in out.splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert all(float(r["z1"]) == 1.0 and float(r["z2"]) == 0.3 for r in rows)
    assert "# seed=4" in out and "# n=" in out


def test_convolve_weights_and_determinism(capsys, tmp_path):
    argv = ["convolve", "--q", "2", "--d", "2", "--mu", "4.6", "--x", "1,0.3", "--y", "0.6,0.2", "--seed", "9",
            "--samples", "500"]
    code, first = run(argv, capsys)
    _, second = run(argv, capsys)
    assert code == 0 and first == second
    doc = json.loads(first)
    assert abs(sum(a["weight"] for a in doc["results"]) - 1) < 1e-12
    assert doc["metadata"]["n"] == 500
    out = tmp_path / "m.json"
    assert main(argv + ["--out", str(out)]) == 0
    assert out.read_text() == first


def test_verify_kappa(capsys):
    code, out = run(["verify", "--q", "1", "--d", "2", "--mu", "2", "--suite", "kappa", "--seed", "3"], capsys)
    doc = json.loads(out)
    res = doc["results"][0]
    assert code == 0 and res["passed"]
    assert abs(res["estimate"] - 3.141592653589793) < 3 * res["std_error"]
    assert doc["environment"]["seed"] == 3


def test_verify_failure_exit(capsys, tmp_path, monkeypatch):
    import bcjacobi.cli as cli
    from bcjacobi.suites import CheckResult

    def fake(profile, suites, settings, seed):
        return [CheckResult("support", "forced", 1.0, 0.0, None, 1.0, 0.0, False, 10, seed)]

    monkeypatch.setattr(cli, "run_suites", fake)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"q": 1, "d": 2, "mu": 2, "suite": "support", "seed": 1}))
    code, out = run(["verify", "--config", str(cfg)], capsys)
    assert code == 1
    assert json.loads(out)["summary"]["passed"] is False


def test_verify_rank1_csv(capsys):
    code, out = run(["verify", "--q", "1", "--d", "2", "--mu", "2", "--suite", "rank1", "--seed", "1",
                     "--samples", "20000", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert all(r["passed"] == "True" for r in rows)
    assert any(r["name"].startswith("oracle n=1") and float(r["residual"]) <= 1e-8 for r in rows)


def test_config_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"q": 1, "d": 2, "mu": 3, "lambda": ["4"]}))
    code, out = run(["poly", "--config", str(cfg), "--mu", "2"], capsys)
    assert json.loads(out)["config"]["mu"] == 2


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"q": 1, "d": 2, "mu": 3, "colour": "red"}))
    with pytest.raises(SystemExit) as info:
        main(["poly", "--config", str(cfg)])
    assert info.value.code == 2


def test_dumps_round_trips_floats():
    vals = [0.1, 1 / 3, 2.0**-1074, 1e300, -0.0]
    assert json.loads(dumps(vals)) == vals


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bcjacobi", "poly", "--q", "1", "--d", "2", "--mu", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert len(json.loads(res.stdout)["results"]) == 3
