import csv
import io
import json
import os
import subprocess
import sys

import pytest

from stokes_evans.cli import run_command


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_bf_text():
    code, out, _ = run("bf")
    assert code == 0
    assert "alpha^(1,0) = 0.5i" in out
    assert "-0.353553390593, 0.353553390593" in out
    assert "rejected root of the cubic: 1i" in out


def test_bf_json():
    code, out, _ = run("bf", "--json")
    data = json.loads(out)
    assert code == 0 and data["exit_code"] == 0 and data["command"] == "bf"


def test_ind2_json():
    code, out, _ = run("ind2", "--N", "2", "--json")
    data = json.loads(out)
    assert code == 0
    re, im = data["ind2"]
    assert abs(re + 3249 / 2304) <= 1e-8 and abs(im) <= 1e-8


def test_ind2_verdict_text():
    code, out, _ = run("ind2", "--N", "3")
    assert code == 0 and "no eps^2-order instability" in out


@pytest.mark.parametrize("argv", [["bogus"], ["trace", "--eps", "0.2"], ["resonance", "--N", "1"],
                                  ["bf", "--kappa", "notanumber"]])
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


@pytest.mark.parametrize("argv", [["coeffs", "--sigma", "0.1"], ["bf", "--mmax", "3"]])
def test_consistency_errors_exit_1(argv):
    code, out, err = run(*argv)
    assert code == 1
    assert "consistency check failed" in err and "error:" in out


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test\nkappa = 4\ng = 4\nN = 3\n")
    code, out, _ = run("bf", "--config", str(cfg), "--json")
    data = json.loads(out)
    assert code == 0 and data["config"]["kappa"] == 4.0
    a11 = sorted(v[0] for v in data["alpha11"])
    assert abs(a11[1] - 2 ** 0.5) <= 1e-8
    code, out, _ = run("bf", "--config", str(cfg), "--kappa", "1", "--g", "1", "--json")
    assert json.loads(out)["config"]["kappa"] == 1.0


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run("bf", "--config", str(cfg))[0] == 2


def test_trace_out_files(tmp_path):
    code, _, _ = run("trace", "--steps", "2", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["gamma", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2"]
    assert len(rows) == 3
    assert float(rows[1][3]) > 0 > float(rows[1][1])
    assert json.loads((tmp_path / "trace.json").read_text())["command"] == "trace"


def test_repeated_runs_identical():
    first = run("resonance", "--N", "2")[1]
    assert first == run("resonance", "--N", "2")[1]


@pytest.mark.parametrize("command", ["stokes", "dispersion", "basis"])
def test_descriptive_commands(tmp_path, command):
    code, out, _ = run(command, "--out", str(tmp_path))
    assert code == 0 and out.strip()
    assert (tmp_path / f"{command}.json").exists()


def test_coeffs_resonance_dump():
    code, out, _ = run("coeffs", "--sigma", "resonance:2", "--dump-reduction")
    assert code == 0
    assert "a^(1, 0)(T) =" in out
    assert "reduction dump:" in out and "w^(0, 1)_2" in out


def test_console_script_module_entry():
    proc = subprocess.run([sys.executable, "-m", "stokes_evans", "bf"], capture_output=True, text=True,
                          env={**os.environ, "EVANS_THREADS": "1"})
    assert proc.returncode == 0 and "alpha^(1,1)" in proc.stdout


def test_verify_passes_and_is_reproducible():
    code, first, _ = run("verify", "--kappa", "1", "--g", "1")
    assert code == 0 and "9/9 acceptance checks passed" in first
    assert first == run("verify", "--kappa", "1", "--g", "1")[1]
