"""End-to-end command line behaviour: exit codes, reports and reproducibility."""

import json
import subprocess
import sys
from math import pi, sqrt

import pytest

from fieldclt.cli import main

FAST = ["--ladder", "4,8,16", "--N", "200", "--seed", "11"]


def _run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_constants_plancherel(tmp_path):
    code, out = _run(tmp_path, "c", "constants", "--p", "2,3")
    assert code == 0
    rep = _report(out)
    assert rep["table"][0]["C_p"] == pytest.approx(sqrt(2 * pi), rel=1e-9)
    assert rep["p_star"] == "1"
    assert (out / "report.csv").read_text().startswith("body,dim,p_star,p,C_p,error_bound")


def test_hybl_table(tmp_path, capsys):
    code, out = _run(tmp_path, "h", "hybl", "--k", "3..8")
    assert code == 0
    rep = _report(out)
    assert [r["p_k"] for r in rep["table"]] == ["4", "3", "8/3", "5/2", "12/5", "7/3"]
    assert all(r["c2"] == "proved" and r["complete"] for r in rep["table"])
    assert rep["strictly_decreasing"] and rep["above_two"]
    assert "p_k=  8/3" in capsys.readouterr().out


def test_hybl_instance_file(tmp_path):
    inst = tmp_path / "dup.txt"
    inst.write_text("ambient 2\nmap\n1 0\nend\nmap\n1 0\nend\nexponents 1 1\n")
    code, out = _run(tmp_path, "h", "hybl", "--k", "3", "--instance", str(inst))
    assert code == 0
    assert _report(out)["instance"]["c2_holds"] == "refuted"
    bad = tmp_path / "bad.txt"
    bad.write_text("ambient 2\nmap\n1 0\n")
    assert _run(tmp_path, "h2", "hybl", "--instance", str(bad))[0] == 2


def test_exit_codes(tmp_path):
    assert _run(tmp_path, "a", "clt", *FAST, "--family", "band_pass")[0] == 3
    assert _run(tmp_path, "b", "clt", "--ladder", "", "--N", "100")[0] == 2
    assert _run(tmp_path, "c", "clt", "--ladder", "8,4", "--N", "100")[0] == 2
    assert _run(tmp_path, "d", "weighted", *FAST)[0] == 3  # not anchored
    assert _run(tmp_path, "e", "clt", *FAST, "--threads", "0")[0] == 2
    assert _run(tmp_path, "f", "constants", "--body", "ball", "--dim", "2", "--p", "1.2")[0] == 3
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[experiment]\nunknown = 1\n")
    assert _run(tmp_path, "g", "clt", "--config", str(cfg))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["clt", "--mode", "cubic"])
    assert exc.value.code == 2


def test_validate_subcommand(tmp_path, capsys):
    assert _run(tmp_path, "v", "validate")[0] == 0
    code, out = _run(tmp_path, "w", "validate", "--family", "band_pass", "--mode", "base")
    assert code == 3
    assert _report(out)["violations"][0]["assumption"] == "B"
    assert _run(tmp_path, "x", "validate", "--N", "3")[0] == 2


def test_clt_report_and_rate_reuse(tmp_path):
    code, out = _run(tmp_path, "clt", "clt", *FAST, "--mode", "hermite2", "--family", "gaussian_type")
    assert code == 0
    rep = _report(out)
    assert rep["mode"] == "hermite2" and len(rep["ladder"]) == 3
    assert "output" not in rep["config"]
    code, rate = _run(tmp_path, "rate", "rate", "--from-report", str(out / "report.json"))
    assert code == 0
    fits = _report(rate)
    assert fits["predicted_dkol_slope"] == -0.5
    assert fits["ratefits"]["dkol"]["slope"] == pytest.approx(rep["ratefits"]["dkol"]["slope"])


@pytest.mark.parametrize("argv", [
    ["clt", *FAST],
    ["clt", *FAST, "--mode", "hermite2", "--family", "gaussian_type", "--generator", "spectral_superposition"],
    ["tightness", "--ladder", "16", "--N", "200", "--seed", "3"],
    ["weighted", *FAST, "--anchored", "--weight", "power_norm", "--nu", "1"],
], ids=["clt", "hermite", "tightness", "weighted"])
def test_reports_byte_identical_across_threads(tmp_path, argv):
    a = _run(tmp_path, "t1", *argv, "--threads", "1")
    b = _run(tmp_path, "t4", *argv, "--threads", "4")
    assert a[0] == b[0] == 0
    for name in ("report.json", "report.csv"):
        assert (a[1] / name).read_bytes() == (b[1] / name).read_bytes()


def test_svg_reproducible(tmp_path):
    a = _run(tmp_path, "s1", "clt", *FAST, "--svg")
    b = _run(tmp_path, "s2", "clt", *FAST, "--svg")
    svg = (a[1] / "dkol.svg").read_bytes()
    assert svg.startswith(b"<?xml") and svg == (b[1] / "dkol.svg").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fieldclt", "hybl", "--k", "3..4", "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "p_k=    4" in proc.stdout
