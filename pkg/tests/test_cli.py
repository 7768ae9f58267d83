import json

import pytest

from semiweyl.cli import main, resolve_threads, run_scenario
from semiweyl.scenario import (
    SUITES,
    ScenarioError,
    bundled_path,
    bundled_scenarios,
    load_scenario,
    parse_field,
    parse_symbol,
)

STATIONARY = """
[scenario]
name = sp
suites = stationary-phase
hbar = 0.2, 0.1, 0.05
[params]
b = 1.0
orders = 0, 1
"""


# ------------------------------------------------------------- parsing


def test_parse_field():
    f = parse_field("abs_power k=1 mu=0.5 base=sin poly=1.0,0.5 factor=2j mollify=0.6")
    assert f.family == "abs_power"
    assert f.params == {"k": 1, "mu": 0.5, "base": "sin", "poly": [1.0, 0.5]}
    assert f.factor == 2j and f.mollify_exp == 0.6
    assert parse_field("smooth cos=2:1.0,4:0.5").params["cos"] == {2: 1.0, 4: 0.5}


@pytest.mark.parametrize("text", ["", "fractal k=1", "smooth poly"])
def test_parse_field_errors(text):
    with pytest.raises(ScenarioError):
        parse_field(text)


def test_parse_symbol():
    terms = parse_symbol("p^2 * [smooth poly=1] + p^0 * [smooth poly=-1,0,1]")
    assert [k for k, _ in terms] == [2, 0]
    with pytest.raises(ScenarioError):
        parse_symbol("q^2 * [smooth poly=1]")


@pytest.mark.parametrize(
    "text, match",
    [
        ("[scenario]\nsuites =\n", "empty suite"),
        ("[scenario]\nsuites = nonsense\n", "unknown suite"),
        ("[other]\nx = 1\n", "missing"),
        ("[scenario]\nsuites = funcalc\ndelta = 1.5\n", "delta"),
        ("[scenario]\nsuites = funcalc\nhbar = 0, 0.1\n", "hbar"),
        ("[scenario]\nsuites = funcalc\ngamma = 2\n", "gamma"),
        ("[scenario]\nsuites = funcalc\n[form]\na22 = smooth poly=1\n", "form key"),
        ("[scenario\n", "cannot read"),
    ],
)
def test_scenario_errors(text, match):
    with pytest.raises(ScenarioError, match=match):
        load_scenario(text)


def test_scenario_fields():
    sc = load_scenario(STATIONARY)
    assert sc.name == "sp" and sc.suites == ["stationary-phase"] and sc.hbars == [0.2, 0.1, 0.05]
    assert sc.delta is None and sc.param("b") == 1.0 and sc.param("missing", 3) == 3


def test_bundled_scenarios_load():
    names = bundled_scenarios()
    assert {"harmonic", "rough", "riesz", "torus", "stationary"} <= set(names)
    for n in names:
        sc = load_scenario(str(bundled_path(n)))
        assert set(sc.suites) <= set(SUITES)


# ------------------------------------------------------------------ runs


def test_run_writes_report_and_csv(tmp_path):
    cfg = tmp_path / "sp.ini"
    cfg.write_text(STATIONARY)
    code, rep = run_scenario(str(cfg), out=str(tmp_path / "out"))
    assert code == 0
    assert set(rep) == {"scenario", "suite", "slopes", "tolerances", "pass", "checks"}
    lines = (tmp_path / "out" / "sp_stationary-phase.csv").read_text().splitlines()
    assert lines[0] == "hbar,N,remainder,quadrature_check" and len(lines) == 7
    assert json.loads((tmp_path / "out" / "sp_report.json").read_text())["pass"] is True


def test_report_is_deterministic(tmp_path):
    cfg = tmp_path / "sp.ini"
    cfg.write_text(STATIONARY)
    run_scenario(str(cfg), out=str(tmp_path / "a"))
    run_scenario(str(cfg), out=str(tmp_path / "b"))
    for f in ("sp_report.json", "sp_stationary-phase.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_empty_hbar_list_gives_header_only(tmp_path):
    cfg = tmp_path / "sp.ini"
    cfg.write_text(STATIONARY.replace("hbar = 0.2, 0.1, 0.05", "hbar ="))
    code, rep = run_scenario(str(cfg), out=str(tmp_path))
    assert (tmp_path / "sp_stationary-phase.csv").read_text() == "hbar,N,remainder,quadrature_check\n"
    assert code == 1 and rep["pass"] is False


def test_main_exit_codes(tmp_path, capsys):
    good = tmp_path / "sp.ini"
    good.write_text(STATIONARY)
    assert main(["run", str(good), "--out", str(tmp_path)]) == 0
    assert "PASS sp/stationary-phase" in capsys.readouterr().out
    bad = tmp_path / "bad.ini"
    bad.write_text("[scenario]\nsuites =\n")
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(good), "--suite", "nonsense"]) == 2
    assert main([]) == 2


def test_main_reports_failures(tmp_path, capsys):
    cfg = tmp_path / "sp.ini"
    cfg.write_text(STATIONARY + "[tolerances]\nstationary_margin = 5\n")
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 1
    assert "FAIL sp/stationary-phase" in capsys.readouterr().err


def test_list_command(capsys):
    assert main(["list"]) == 0
    assert "harmonic" in capsys.readouterr().out.split()


def test_bundled_name_resolves(tmp_path):
    code, rep = run_scenario("stationary", out=str(tmp_path))
    assert code == 0 and rep["scenario"] == "stationary"


def test_threads_resolution(monkeypatch):
    monkeypatch.delenv("SEMIWEYL_THREADS", raising=False)
    assert resolve_threads(None) == 1
    monkeypatch.setenv("SEMIWEYL_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("SEMIWEYL_THREADS", "many")
    assert resolve_threads(None) == 1
