import json
import subprocess
import sys

import pytest

from orientwave import cli
from orientwave import scenarios as sc
from orientwave.config import default_config, parse_config
from orientwave.errors import IoError, ValidationError


def small_solve1d(**extra):
    return json.dumps({"schema_version": 1, "scenario": "solve1d", "grid": {"n": 1024}, **extra})


def write(tmp_path, text, name="cfg.json"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_empty_table_writes_header_only(tmp_path):
    path = tmp_path / "s.csv"
    sc.write_series(path, sc.Table(("a", "b")))
    assert path.read_bytes() == b"a,b\n"


def test_series_format(tmp_path):
    t = sc.Table(("n", "x", "flag"))
    t.add(3, 0.1, True)
    t.add(4, -0.0, False)
    t.add(5, float("inf"), False)
    path = tmp_path / "s.csv"
    sc.write_series(path, t)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines() == ["n,x,flag", "3,0.10000000000000001,1", "4,0,0", "5,inf,0"]
    with pytest.raises(IoError):
        sc.write_series(tmp_path / "missing" / "s.csv", t)


def test_fitted_order_needs_three_points():
    r = sc.RunReport("x")
    assert r.add_convergence("two", [1, 2], [1.0, 0.25]) is None
    assert r.add_convergence("three", [1, 2, 4], [1.0, 0.25, 0.0625]) == pytest.approx(2.0)
    assert r.add_convergence("zero", [1, 2, 4], [1.0, 0.0, 0.0]) is None


def test_nan_check_fails_and_serializes():
    r = sc.RunReport("x")
    r.check("bad", float("nan"), 1.0, "<")
    assert not r.passed
    assert json.loads(r.to_json())["checks"][0]["value"] == "nan"


def test_report_is_deterministic_modulo_wall_time():
    cfg = parse_config(small_solve1d())
    a, b = sc.run_scenario(cfg), sc.run_scenario(cfg)
    assert json.dumps(a.deterministic_dict(), sort_keys=True) == json.dumps(b.deterministic_dict(), sort_keys=True)
    body = json.loads(a.to_json())
    assert set(body) == {"scenario", "passed", "metrics", "convergence", "checks", "wall_time"}


def test_twist_exact_residual_study_order():
    rep = sc.run_convergence(default_config("twist-exact"))
    assert rep.convergence["pde_residual"]["fitted_order"] == pytest.approx(2.0, abs=0.2)
    with pytest.raises(ValidationError):
        sc.run_convergence(default_config("solve1d"))


def test_hs_verify_aggregates_all_checks():
    rep = sc.run_scenario(default_config("hs-verify"))
    names = {c.name for c in rep.checks}
    assert {"jacobi_hs", "jacobi_ch", "vector_fields_hs_order", "vector_fields_ch_order"} <= names
    assert {"lax_residual_order", "lax_corruption_gain"} <= names
    assert rep.passed


def test_thread_limit(monkeypatch):
    monkeypatch.delenv(sc.THREADS_ENV, raising=False)
    assert sc.thread_limit() == 1
    monkeypatch.setenv(sc.THREADS_ENV, "3")
    assert sc.thread_limit() == 3
    for bad in ("0", "two"):
        monkeypatch.setenv(sc.THREADS_ENV, bad)
        with pytest.raises(ValidationError):
            sc.thread_limit()


def test_parallel_runs_match_sequential():
    cfgs = [parse_config(small_solve1d()), default_config("polarized")]
    seq = sc.run_many(cfgs, workers=1)
    par = sc.run_many(cfgs, workers=2)
    for a, b in zip(seq, par):
        assert a.deterministic_dict() == b.deterministic_dict()


def test_cli_success_writes_outputs(tmp_path, capsys):
    cfg = write(tmp_path, small_solve1d())
    out = tmp_path / "out"
    assert cli.main(["solve1d", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "report.json").exists() and (out / "series_energy.csv").exists()
    assert "PASS  energy_drift" in capsys.readouterr().out


def test_cli_failed_check_exits_one(tmp_path):
    cfg = write(tmp_path, small_solve1d(tolerances={"energy_drift": 1e-30}))
    assert cli.main(["solve1d", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "report.json").read_text())["passed"] is False


@pytest.mark.parametrize(
    "text,scenario",
    [
        (small_solve1d(phi0=1.5707963267948966), "solve1d"),
        (small_solve1d(extra_key=1), "solve1d"),
        ("{not json", "solve1d"),
        (small_solve1d(), "polarized"),
    ],
)
def test_cli_bad_input_exits_two(tmp_path, text, scenario, capsys):
    cfg = write(tmp_path, text)
    assert cli.main([scenario, "--config", str(cfg)]) == 2
    assert "orientwave:" in capsys.readouterr().err


def test_cli_missing_config_exits_two(tmp_path):
    assert cli.main(["solve1d", "--config", str(tmp_path / "none.json")]) == 2


def test_cli_epsilon_and_resolution_overrides(tmp_path):
    flat = {"family": "gaussian-bump", "amplitude": 0.0}
    text = json.dumps({"schema_version": 1, "scenario": "match-fast-twist", "profiles": {"f": flat, "g": flat}})
    cfg = write(tmp_path, text)
    code = cli.main(["match-fast-twist", "--config", str(cfg), "--out", str(tmp_path), "--resolution", "256", "--epsilon", "0.1,0.05"])
    assert code == 0
    rows = (tmp_path / "series_matching.csv").read_text().splitlines()
    assert [r.split(",")[:2] for r in rows[1:]] == [["0.10000000000000001", "256"], ["0.050000000000000003", "512"]]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["metrics"]["max_discrepancy"] == 0.0


def test_cli_rejects_bad_epsilon(tmp_path):
    cfg = write(tmp_path, json.dumps({"schema_version": 1, "scenario": "match-fast-twist"}))
    with pytest.raises(SystemExit):
        cli.main(["match-fast-twist", "--config", str(cfg), "--epsilon", "a,b"])
    assert cli.main(["match-fast-twist", "--config", str(cfg), "--epsilon", "0.7"]) == 2


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, small_solve1d())
    proc = subprocess.run(
        [sys.executable, "-m", "orientwave.cli", "solve1d", "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "all checks passed" in proc.stdout
