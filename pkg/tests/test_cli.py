import json
import math
import pathlib
import subprocess
import sys

import pytest

from spiraldim import cli
from spiraldim.curve_zoo import circle
from spiraldim.special_functions import BesselParams, gen_bessel

DATA = pathlib.Path(__file__).parent / "data"


def run(*args):
    return subprocess.run([sys.executable, "-m", "spiraldim", *args], capture_output=True, text=True)


def test_eval_envelope_law(capsys):
    assert cli.main(["eval", "--nu", "0", "--mu", "1", "--t", "50"]) == 0
    x, dx, ddx, r, phi = map(float, capsys.readouterr().out.split(","))
    assert r * r * 50 * math.pi / 2 == pytest.approx(1, abs=0.01)
    assert phi == math.atan2(dx, x)


def test_eval_matches_library(capsys):
    assert cli.main(["eval", "--nu", "5", "--mu", "1", "--t", "50", "--kind", "Y"]) == 0
    vals = [float(v) for v in capsys.readouterr().out.split(",")]
    assert vals[:3] == list(gen_bessel(BesselParams(5, 1), "Y", 50.0))


def test_exit_codes(tmp_path):
    assert run("eval", "--nu", "5", "--mu", "1", "--t", "0").returncode == 2
    assert run("eval", "--nu", "5").returncode == 2
    assert run("sweep", "--mu-list", "").returncode == 2
    assert run("frobnicate").returncode == 2
    out = tmp_path / "missing" / "x.csv"
    assert run("trajectory", "--nu", "5", "--mu", "1", "--out", str(out)).returncode == 3
    res = run("phase-dim", "--T", "200", "--scales-decades=-1,-1.2", "--n-scales", "3")
    assert res.returncode == 4 and "error" in res.stderr.lower()


def test_help_documents_exit_codes():
    res = run("--help")
    assert res.returncode == 0
    assert "exit codes" in res.stdout and "SPIRALDIM_SEED" in res.stdout


def test_trajectory_golden(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["trajectory", "--nu", "5", "--mu", "1", "--t0", "10", "--T", "12", "--out", str(out)]) == 0
    assert out.read_text() == (DATA / "golden_trajectory.csv").read_text()


def test_trajectory_svg(tmp_path):
    svg = tmp_path / "f.svg"
    cli.main(["trajectory", "--nu", "5", "--mu", "0.2", "--T", "100", "--out", str(tmp_path / "f.csv"),
              "--svg", str(svg)])
    text = svg.read_text()
    assert 'viewBox="0 0 1000 1000"' in text
    assert text.count("<polyline") == 1


def test_waviness_reports(tmp_path):
    out = tmp_path / "w.json"
    assert cli.main(["waviness", "--nu", "0", "--mu", "1", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())["waviness"]
    assert rep["is_wavy"] is False and rep["t_sequence"] == [10.0]
    svg = tmp_path / "w.svg"
    assert cli.main(["waviness", "--nu", "0.5", "--mu", "0.6", "--out", str(out), "--svg", str(svg)]) == 0
    doc = json.loads(out.read_text())
    assert doc["waviness"]["is_wavy"] is True
    assert doc["config"]["T"] == 500.0
    assert 'viewBox="0 0 1000 1000"' in svg.read_text()


def test_report_round_trip(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["waviness", "--nu", "2", "--mu", "1.4", "--T", "300", "--out", str(a)]) == 0
    assert cli.main(["waviness", "--config", str(a), "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep setup\nnu = 2\nmu_list = 0.2, 1.0\nseed = 5\noffsets=3\n")
    monkeypatch.setenv("SPIRALDIM_SEED", "99")
    args = cli.build_parser().parse_args(["sweep", "--config", str(cfg), "--nu", "3"])
    rc = cli.build_config(args)
    assert rc.nu == 3.0 and rc.mu_list == [0.2, 1.0] and rc.seed == 5 and rc.offsets == 3
    rc = cli.build_config(cli.build_parser().parse_args(["phase-dim"]))
    assert rc.seed == 99
    cfg.write_text("colour = red\n")
    assert cli.main(["eval", "--config", str(cfg), "--t", "3"]) == 2


def test_sweep_rows(tmp_path):
    out = tmp_path / "s.json"
    svg = tmp_path / "s.svg"
    rc = cli.main(["sweep", "--nu", "5", "--T", "1000", "--mu-list", "0.2,1.0,1.8,2.5", "--out", str(out),
                   "--svg", str(svg)])
    assert rc == 0
    rows = json.loads(out.read_text())["rows"]
    assert [r["mu"] for r in rows] == [0.2, 1.0, 1.8, 2.5]
    analytic = [r["analytic"] for r in rows[:3]]
    assert analytic == pytest.approx([20 / 19, 4 / 3, 20 / 11])
    assert analytic == sorted(analytic)
    assert [r["status"] for r in rows] == ["ok", "ok", "ok", rows[3]["status"]]
    assert rows[3]["status"].startswith("failed")
    assert svg.read_text().count("<polyline") == 2


def test_calibrate_exit_codes(monkeypatch, capsys):
    monkeypatch.setattr(cli, "CALIBRATION", [("circle", circle, 0.02)])
    assert cli.main(["calibrate"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert rows[0]["passed"] and abs(rows[0]["bias"]) < 0.02
    monkeypatch.setattr(cli, "CALIBRATION", [("circle", circle, -1.0)])
    assert cli.main(["calibrate"]) == 5
