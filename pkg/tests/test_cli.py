import json
import subprocess
import sys

import pytest

from siegelmate.cli import REPORT_SCHEMA, main


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SIEGELMATE_OUTDIR", raising=False)
    return tmp_path


def manifest(path):
    return json.loads(open(str(path) + ".manifest.json").read())


def test_omega(capsys, in_tmp):
    assert main(["omega", "--theta", "cf:1x40", "--bits", "256"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["digits"].startswith("101")
    data = json.loads((in_tmp / "omega.json").read_text())
    assert data["digits"].startswith("1011010110") and data["theta_cf"] == "cf:1x40"
    m = manifest(in_tmp / "omega.json")
    assert m["config"]["bits"] == 256 and m["config"]["theta"] == "cf:1x40" and m["command"] == "omega"


def test_relation(in_tmp):
    assert main(["relation", "--theta", "cf:1x40", "--nu", "cf:2x40", "--N", "10", "--csv", "rel.csv"]) == 0
    data = json.loads((in_tmp / "relation.json").read_text())
    assert data["verdict"] == "certified_positive" and data["min_distance"] > 0
    assert (in_tmp / "rel.csv").read_text().splitlines()[0] == "n,m,distance"


def test_solve_mating(in_tmp):
    argv = ["solve", "--family", "mating", "--theta", "cf:1x40", "--nu", "cf:1x40", "--out", "params.json"]
    assert main(argv) == 0
    data = json.loads((in_tmp / "params.json").read_text())
    a = complex(data["a"]["re"], data["a"]["im"])
    b = complex(data["b"]["re"], data["b"]["im"])
    assert abs(a - complex(-0.019048, -0.298116)) < 1e-3
    assert abs(b - complex(3.280417, -0.667122)) < 1e-3
    assert manifest(in_tmp / "params.json")["config"]["samples"] == 512


def test_rotset_and_rays(in_tmp):
    assert main(["rotset", "--theta", "cf:1x40"]) == 0
    data = json.loads((in_tmp / "rotset.json").read_text())
    assert abs(data["staircase_rho"] - 0.618) < 0.02
    assert main(["rays", "--theta", "cf:1x40", "--angle", "0", "--angle", "1/2", "--csv", "rays.csv"]) == 0
    rays = json.loads((in_tmp / "rays.json").read_text())["rays"]
    assert [r["label"] for r in rays] == ["0", "1/2"] and all(r["landed"] for r in rays)
    assert (in_tmp / "rays.csv").exists()


def test_usage_errors(capsys):
    for argv in (["omega", "--theta", "cf:1x40", "--theta", "0.3"],
                 ["omega"],
                 ["frobnicate"],
                 ["omega", "--theta", "cf:1x40", "--bogus"],
                 ["omega", "--theta", "cf:0,1"]):
        with pytest.raises(SystemExit) as ei:
            main(argv)
        assert ei.value.code == 2
    assert main(["solve", "--family", "mating", "--theta", "cf:1x40"]) == 2
    assert "--nu is required" in capsys.readouterr().err


def test_numeric_error_exit_one(capsys):
    # a decimal input truncates to a rational, which cannot certify 256 bits of omega
    assert main(["omega", "--theta", "0.4", "--bits", "256"]) == 1
    assert "PrecisionError" in capsys.readouterr().err


def test_rerun_from_manifest_is_byte_identical(in_tmp):
    argv = ["render", "--theta", "cf:1x40", "--width", "24", "--height", "16", "--out", "img.ppm"]
    assert main(argv) == 0
    first = (in_tmp / "img.ppm").read_bytes()
    m = manifest(in_tmp / "img.ppm")
    (in_tmp / "img.ppm").unlink()
    assert main(m["argv"]) == 0
    assert (in_tmp / "img.ppm").read_bytes() == first
    assert m["config"]["max_iter"] == 2000 and m["config"]["viewport"] is None
    assert first.startswith(b"P6\n24 16\n255\n")


def test_png_output(in_tmp):
    assert main(["render", "--theta", "cf:1x40", "--width", "8", "--height", "8", "--out", "x.png"]) == 0
    assert (in_tmp / "x.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_outdir_override(in_tmp, monkeypatch):
    monkeypatch.setenv("SIEGELMATE_OUTDIR", str(in_tmp / "runs"))
    assert main(["omega", "--theta", "cf:2x40"]) == 0
    assert (in_tmp / "runs" / "omega.json").exists()
    m = json.loads((in_tmp / "runs" / "omega.json.manifest.json").read_text())
    assert m["outdir_override"] == str(in_tmp / "runs")
    assert m["outputs"] == [str(in_tmp / "runs" / "omega.json")]


def test_drops(in_tmp):
    assert main(["drops", "--theta", "cf:1x40", "--max-generation", "2", "--max-depth", "4", "--csv", "b.csv"]) == 0
    data = json.loads((in_tmp / "drops.json").read_text())
    assert len(data["nodes"]) == 4 + 6
    assert set(data["limb_profile"]) == {"1", "2", "3", "4"}


def test_pinch(in_tmp):
    assert main(["pinch", "--theta", "cf:1x40", "--nu", "cf:1x40"]) == 0
    lines = (in_tmp / "pinch.csv").read_text().splitlines()
    assert len(lines) == 2


def test_report(in_tmp):
    assert main(["report", "--theta", "cf:1x40", "--nu", "cf:1x40", "--max-depth", "6"]) == 0
    data = json.loads((in_tmp / "report.json").read_text())
    assert data["schema"] == REPORT_SCHEMA
    assert set(data) >= {"solve", "omega", "relation", "limb_profile", "limb_ratio"}
    assert data["relation"]["verdict"] == "certified_positive"


def test_console_script_entry(in_tmp):
    out = subprocess.run([sys.executable, "-m", "siegelmate.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "0.1.0"
