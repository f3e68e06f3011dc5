import json
import subprocess
import sys

import pytest

from siderian.cli import EXIT_ERROR, EXIT_NOT_CERTIFIED, EXIT_OK, dump_report, main, run_experiment
from siderian.config import DEFAULTS, MODES, ConfigError, load_raw, parse_config


def test_defaults_fill_in():
    cfg = parse_config({"mode": "fluid-certify", "eos": {"gamma": 1.4}})
    assert cfg.section("eos")["gamma"] == 1.4
    assert cfg.section("eos")["a0"] == DEFAULTS["eos"]["a0"]
    assert json.loads(cfg.to_json())["mode"] == "fluid-certify"


@pytest.mark.parametrize("raw, field", [
    ({"mode": "nope"}, "mode"),
    ({"bogus": 1}, "bogus"),
    ({"eos": {"gama": 1.4}}, "eos.gama"),
    ({"eos": {"gamma": 0.9}}, "eos.gamma"),
    ({"eos": {"gamma": "x"}}, "eos.gamma"),
    ({"mode": "fluid-certify", "eos": {"gamma": 2.2}}, "eos.gamma"),
    ({"grid": {"N": 4}}, "grid.N"),
    ({"grid": {"N": 100.5}}, "grid.N"),
    ({"grid": {"cfl": 1.5}}, "grid.cfl"),
    ({"grid": {"r_max": 0.5}}, "grid.r_max"),
    ({"plasma": {"units": "si"}}, "plasma.units"),
    ({"shapes": {"kappa": -1}}, "shapes.kappa"),
    ({"scan": {"stop": 10.0}}, "scan.stop"),
    ({"output": {"report": 3}}, "output.report"),
    ({"eos": 3}, "eos"),
])
def test_invalid_configs_name_the_field(raw, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_config(raw)


def test_load_raw_sources(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"mode": "scan-nbar"}')
    assert load_raw(str(path)) == {"mode": "scan-nbar"}
    assert load_raw('{"mode": "eos-check"}')["mode"] == "eos-check"
    with pytest.raises(ConfigError, match="malformed"):
        load_raw("{broken")
    with pytest.raises(ConfigError, match="cannot read"):
        load_raw(str(tmp_path / "missing.json"))
    with pytest.raises(ConfigError, match="object"):
        load_raw("[1]")


def test_report_dump_is_canonical():
    text = dump_report({"b": float("inf"), "a": [1, 2.5]})
    assert text.index('"a"') < text.index('"b"') and '"inf"' in text


@pytest.mark.parametrize("mode, code", [
    ("eos-check", EXIT_OK), ("fluid-certify", EXIT_OK), ("scan-nbar", EXIT_OK),
    ("scan-lambda", EXIT_OK), ("plasma-certify", EXIT_NOT_CERTIFIED),
])
def test_fast_modes_exit_codes(mode, code, tmp_path):
    report, got = run_experiment(parse_config({"mode": mode}), tmp_path)
    assert got == code and report["exit_code"] == code
    assert json.loads((tmp_path / "report.json").read_text())["mode"] == mode


def test_fluid_certify_report_content():
    report, _ = run_experiment(parse_config({"mode": "fluid-certify"}))
    rep = report["report"]
    assert report["certified"] and rep["d1"] and rep["d4"] and rep["T_star"] > 0
    assert report["scan"]["nbar"] == report["nbar"]


def test_plasma_certify_at_large_lambda():
    report, code = run_experiment(parse_config({"mode": "plasma-certify", "shapes": {"lambda": 8192.0}}))
    assert code == EXIT_OK and report["certificate"]["verdict"] and report["T_bound"] > 0


def test_small_simulations_write_series(tmp_path):
    cfg = parse_config({"mode": "fluid-simulate", "background": {"nbar": 1e-2}, "shapes": {"kappa": 0.5, "edge": 6},
                        "grid": {"N": 128, "t_end": 0.2}, "output": {"profile": "profile.csv"}})
    report, code = run_experiment(cfg, tmp_path)
    assert code == EXIT_OK and report["run"]["breakdown_time"] is None
    assert (tmp_path / "series.csv").exists() and (tmp_path / "profile.csv").exists()
    cfg = parse_config({"mode": "plasma-simulate", "grid": {"N": 128, "t_end": 0.5}})
    report, code = run_experiment(cfg, tmp_path)
    assert code == EXIT_OK and set(report["identities"]) >= {"oscillator_residual", "max_abs_mass"}


def test_simulation_rejects_grid_too_small():
    cfg = parse_config({"mode": "plasma-simulate", "grid": {"N": 64, "r_max": 1.01, "t_end": 8.0}})
    with pytest.raises(ConfigError, match="r_max"):
        run_experiment(cfg)


def test_main_exit_codes(tmp_path, capsys):
    assert main(["eos-check", "--quiet"]) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text('{"eos": {"gamma": 0.5}}')
    assert main(["eos-check", "--config", str(bad)]) == EXIT_ERROR
    assert "eos.gamma" in capsys.readouterr().err
    other = tmp_path / "other.json"
    other.write_text('{"mode": "scan-nbar"}')
    assert main(["eos-check", "--config", str(other)]) == EXIT_ERROR
    assert main(["plasma-certify", "--quiet"]) == EXIT_NOT_CERTIFIED


def test_console_entry_point_reads_stdin(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "siderian.cli", "eos-check", "--config", "-"],
                          input='{"eos": {"gamma": 1.4}}', capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["gamma"] == 1.4


def test_modes_listed():
    assert set(MODES) == {"eos-check", "fluid-certify", "fluid-simulate", "plasma-certify", "plasma-simulate",
                          "scan-nbar", "scan-lambda"}


def test_config_round_trip():
    cfg = parse_config({"mode": "plasma-simulate", "grid": {"N": 512}, "shapes": {"lambda": 3.0}})
    again = parse_config(json.loads(cfg.to_json()))
    assert again.raw == cfg.raw and again.to_json() == cfg.to_json()
