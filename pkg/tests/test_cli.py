import csv
import json
import math
import subprocess
import sys

import pytest

from kerrmzi import cli
from kerrmzi.inputs import InputSpec, required_cutoff
from kerrmzi.scenario import parse_scenario

SMALL = """\
[scenario]
name = small
sweep = phi
start = 0
stop = pi
points = 7

[input]
states = number:2, thermal:1

[circuit]
kind = SK, CK
chi = pi/2

[detection]
eta_det = 0.95

[output]
observables = parity, fisher, qfi, deficit
references = SQL, F_SQL
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL, encoding="utf-8")
    return p


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_malformed_chi_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("chi = pi/2", "chi = half-pi"))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "chi" in capsys.readouterr().err


def test_empty_file_exit_2(tmp_path):
    assert cli.main(["validate", write(tmp_path, "")]) == 2


def test_missing_file_exit_2(tmp_path):
    assert cli.main(["validate", str(tmp_path / "nope.ini")]) == 2


def test_unknown_subcommand_exit_2():
    assert cli.main(["frobnicate"]) == 2


def test_eta_det_out_of_range_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("eta_det = 0.95", "eta_det = 1.2"))
    assert cli.main(["validate", cfg]) == 3
    assert "eta_det" in capsys.readouterr().err


def test_too_few_points_exit_3(tmp_path):
    assert cli.main(["validate", write(tmp_path, SMALL.replace("points = 7", "points = 1"))]) == 3


def test_small_cutoff_exit_4(tmp_path):
    cfg = write(tmp_path, SMALL.replace("states = number:2, thermal:1", "states = thermal:1\nn_max = 5"))
    assert cli.main(["validate", cfg]) == 4


def test_validate_fig2_reports_cutoff(capsys):
    assert cli.main(["validate", "fig2"]) == 0
    out = capsys.readouterr().out
    assert f"N_max = {required_cutoff(InputSpec.thermal(5.0, 1e-10))}" in out
    assert "N_max = 126" in out


def test_preset_roundtrip(capsys):
    assert cli.main(["preset", "fig1c"]) == 0
    text = capsys.readouterr().out
    sc = parse_scenario(text)
    assert sc.name == "fig1c"
    assert sc.columns() == ["nbar", "dphi_min_SK", "dphi_min_CK", "SQL", "HL"]
    assert cli.main(["preset", "fig9z"]) == 2


def test_list_presets(capsys):
    assert cli.main(["list-presets"]) == 0
    names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert names == sorted(["fig1b", "fig1c", "fig2", "fig3a", "fig3b", "fig3c", "figS2", "figS3", "figS4"])


@pytest.mark.parametrize("name", cli.preset_names())
def test_every_preset_parses(name):
    sc = parse_scenario(cli.preset_text(name))
    assert sc.points >= 2
    sc.resolved_cutoffs()


def test_run_outputs_and_rerun_identical(small_cfg, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(small_cfg), "--out", str(out1), "--workers", "1"]) == 0
    assert cli.main(["run", str(small_cfg), "--out", str(out2), "--workers", "1"]) == 0
    csv1 = (out1 / "small.csv").read_bytes()
    assert csv1 == (out2 / "small.csv").read_bytes()
    assert (out1 / "small.json").read_bytes() == (out2 / "small.json").read_bytes()
    assert b"\r" not in csv1
    rows = list(csv.reader(csv1.decode("utf-8").splitlines()))
    assert rows[0][0] == "phi_rad"
    assert len(rows) == 8
    assert all(len(r) == len(rows[0]) for r in rows)
    phis = [float(r[0]) for r in rows[1:]]
    assert phis == pytest.approx([k * math.pi / 6 for k in range(7)])
    summary = json.loads((out1 / "small.json").read_text())
    assert summary["columns"] == rows[0]
    assert summary["n_max"]["number2"] == 2
    assert summary["settings"]["eta_det"] == [0.95]
    assert summary["version"].startswith("0.1.0")


def test_workers_do_not_change_output(small_cfg, tmp_path):
    assert cli.main(["run", str(small_cfg), "--out", str(tmp_path / "one"), "--workers", "1"]) == 0
    assert cli.main(["run", str(small_cfg), "--out", str(tmp_path / "two"), "--workers", "2"]) == 0
    assert (tmp_path / "one" / "small.csv").read_bytes() == (tmp_path / "two" / "small.csv").read_bytes()


def test_workers_env(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert cli.default_workers() == 3
    monkeypatch.setenv(cli.WORKERS_ENV, "zero")
    with pytest.raises(cli.ConfigError):
        cli.default_workers()
    monkeypatch.delenv(cli.WORKERS_ENV)
    assert cli.default_workers() >= 1


def test_console_entry_point(small_cfg, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "kerrmzi.cli", "validate", str(small_cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "N_max" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "kerrmzi.cli", "validate", str(tmp_path / "none.ini")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
