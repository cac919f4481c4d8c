import json
from pathlib import Path as FsPath

import numpy as np
import pytest

from loctime.cli import main
from loctime.config import apply_overrides, load_config
from loctime.exceptions import ConfigurationError
from loctime.reporting import validate_report

CONFIGS = FsPath(__file__).resolve().parent.parent / "configs"
SMALL = ["--grid-log2", "10", "--paths", "8", "--ladder", "0.125,0.0625,0.03125"]


def run(*argv):
    return main([str(a) for a in argv])


@pytest.mark.parametrize("name,rows", [("brownian.yaml", 1025), ("ou.yaml", 1025), ("linear.yaml", 1001)])
def test_simulate_fixture_configs(tmp_path, name, rows):
    assert run("simulate", "--config", CONFIGS / name, "--out", tmp_path / "a") == 0
    files = sorted((tmp_path / "a").glob("path_*.csv"))
    assert files
    for f in files:
        lines = f.read_text().splitlines()
        assert lines[0] == "t,x" and len(lines) == rows + 1
    assert run("simulate", "--config", CONFIGS / name, "--out", tmp_path / "b") == 0
    for f in files:
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_simulate_constant_column(tmp_path):
    assert run("simulate", "--config", CONFIGS / "constant.yaml", "--out", tmp_path) == 0
    data = np.loadtxt(tmp_path / "path_0000.csv", delimiter=",", skiprows=1)
    assert np.all(data[:, 1] == 1.0)


def test_seed_override_changes_paths(tmp_path):
    run("simulate", "--config", CONFIGS / "brownian.yaml", "--out", tmp_path / "a", "--paths", "1")
    run("simulate", "--config", CONFIGS / "brownian.yaml", "--out", tmp_path / "b", "--paths", "1", "--seed", "5")
    assert (tmp_path / "a" / "path_0000.csv").read_bytes() != (tmp_path / "b" / "path_0000.csv").read_bytes()


def test_estimate_constant_and_linear(tmp_path, capsys):
    assert run("estimate", "--config", CONFIGS / "constant.yaml", "--eps", 0.0625, "--out", tmp_path / "c") == 0
    data = np.loadtxt(tmp_path / "c" / "curve_J.csv", delimiter=",", skiprows=1)
    assert np.all(data[:, 1] == 0.0)
    rc = run("estimate", "--config", CONFIGS / "linear.yaml", "--eps", 0.1, "--out", tmp_path / "l",
             "--check-identities")
    assert rc == 0
    j = np.loadtxt(tmp_path / "l" / "curve_J.csv", delimiter=",", skiprows=1)
    assert j[-1, 1] == pytest.approx(0.1, abs=1e-12)
    assert "identity J" in capsys.readouterr().out


def test_estimate_from_path_csv(tmp_path):
    run("simulate", "--config", CONFIGS / "brownian.yaml", "--out", tmp_path, "--paths", "1")
    rc = run("estimate", "--path-csv", tmp_path / "path_0000.csv", "--eps", 0.125,
             "--scheme", "I3", "--scheme", "QV", "--out", tmp_path / "e")
    assert rc == 0
    assert {f.name for f in (tmp_path / "e").iterdir()} == {"curve_I3.csv", "curve_QV.csv"}


def test_exit_codes(tmp_path):
    assert run("estimate", "--config", CONFIGS / "linear.yaml", "--eps", 0.1001, "--out", tmp_path) == 3
    assert run("converge", "--config", tmp_path / "missing.yaml") == 4
    assert run("converge", "--set", "bogus=1") == 2
    assert run("converge", "--out", tmp_path) == 2  # no scheme
    (tmp_path / "bad.yaml").write_text("scheme: [unclosed\n")
    assert run("converge", "--config", tmp_path / "bad.yaml") == 2
    assert run("report", tmp_path / "nope.json") == 4


def test_selftest(tmp_path, capsys):
    assert run("converge", "--selftest", "--out", tmp_path) == 0
    payload = json.loads((tmp_path / "selftest.json").read_text())
    assert abs(payload["fitted_rate"] - 0.25) <= 1e-12


def test_converge_outputs_and_reproducibility(tmp_path):
    args = ["converge", "--scheme", "J", *SMALL, "--seed", 4, "--no-timings"]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    for name in ("report.json", "rungs.csv", "loglog.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    validate_report(json.loads((tmp_path / "a" / "report.json").read_text()))
    assert (tmp_path / "a" / "rungs.csv").read_text().startswith("eps,mean_sup_error,std_error\n")


def test_enforce_exit_code(tmp_path):
    args = ["converge", "--scheme", "J", *SMALL, "--out", tmp_path]
    assert run(*args, "--set", "terminal_max=1e-9") == 0
    assert run(*args, "--set", "terminal_max=1e-9", "--enforce") == 5


def test_as_converge(tmp_path):
    rc = run("as-converge", "--scheme", "J", "--grid-log2", 10, "--paths", 8,
             "--ladder", "0.25,0.0625,0.015625", "--out", tmp_path)
    assert rc == 0
    data = json.loads((tmp_path / "as_report.json").read_text())
    assert len(data["trajectories"]) == 8
    assert run("as-converge", "--scheme", "J", *SMALL, "--out", tmp_path) == 2  # ratio 1/2


def test_report_verb(tmp_path, capsys):
    assert run("report") == 0
    assert capsys.readouterr().out.count("\n") == 2
    for s in ("J", "I3"):
        run("converge", "--scheme", s, *SMALL, "--out", tmp_path / s)
    capsys.readouterr()
    assert run("report", tmp_path / "J" / "report.json", tmp_path / "I3", "--out", tmp_path / "sum") == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split("|")[1].strip() for ln in lines[2:]] == ["I3", "J"]
    assert (tmp_path / "sum" / "summary.md").exists()


def test_config_overrides_win(tmp_path):
    (tmp_path / "c.yaml").write_text("scheme: J\nseed: 3\nladder: [0.5, 0.25]\n")
    cfg = load_config(tmp_path / "c.yaml")
    cfg = apply_overrides(cfg, ["seed=9", "ladder=[0.25, 0.125]"])
    assert cfg["seed"] == 9 and cfg["ladder"] == [0.25, 0.125]
    with pytest.raises(ConfigurationError):
        apply_overrides(cfg, ["noequals"])
    (tmp_path / "d.yaml").write_text("unknown_key: 1\n")
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "d.yaml")
