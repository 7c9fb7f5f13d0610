import json
import os
import subprocess
import sys

import pytest

from qproj import __version__
from qproj.cli import atomic_write, main

FAST_RATE = {
    "kernel": "bspline:2",
    "analyzer": "delta",
    "matrix": 2,
    "f": "gaussian",
    "p": 2,
    "levels": [2, 3, 4, 5],
    "seed": 3,
}


def write_config(tmp_path, cfg, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == f"qp {__version__}"


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "qproj.cli", "version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("qp ")


def test_check_kernel_hat(capsys):
    assert main(["check-kernel", "--kernel", "bspline:2", "--analyzer", "delta"]) == 0
    cert = json.loads(capsys.readouterr().out)["certificate"]
    assert cert["effective_order"] == 2 and cert["strang_fix_order"] == 2


def test_check_kernel_with_tail_and_matrix(capsys):
    code = main(["check-kernel", "--kernel", "bspline:4", "--matrix", "[[2,0],[0,2]]", "--max-s", "3", "--tail",
                 "--lattice-radius", "10"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["tail_bound"]["status"] in ("converged", "borderline")
    assert out["analyzer_in_snp_class"] is True


def test_bad_kernel_is_config_error(capsys):
    assert main(["check-kernel", "--kernel", "spline:2"]) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2


def test_missing_config(tmp_path, capsys):
    assert main(["rate", "--config", str(tmp_path / "missing.json")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path):
    cfg = dict(FAST_RATE, colour="blue")
    assert main(["rate", "--config", write_config(tmp_path, cfg)]) == 2


def test_unknown_function_rejected(tmp_path):
    cfg = dict(FAST_RATE, f="nope")
    assert main(["rate", "--config", write_config(tmp_path, cfg)]) == 2


def test_rate_outputs_deterministic(tmp_path):
    cfg = write_config(tmp_path, FAST_RATE)
    outs = []
    for tag in "ab":
        out, csv_path = tmp_path / f"r{tag}.json", tmp_path / f"e{tag}.csv"
        assert main(["rate", "--config", cfg, "--out", str(out), "--csv", str(csv_path)]) == 0
        outs.append((out.read_bytes(), csv_path.read_bytes()))
        assert (tmp_path / f"r{tag}.json.meta.json").exists()
    assert outs[0] == outs[1]
    report = json.loads(outs[0][0])
    assert report["verdict"] == "PASS" and report["seed"] == 3
    assert "environment" in report and "certificate" in report
    assert outs[0][1].decode().splitlines()[0] == "j,error,modulus,tail_term,ratio"
    assert not [p for p in os.listdir(tmp_path) if p.endswith(".tmp")]


def test_seed_override(tmp_path):
    cfg = write_config(tmp_path, FAST_RATE)
    out = tmp_path / "r.json"
    assert main(["rate", "--config", cfg, "--out", str(out), "--seed", "11"]) == 0
    assert json.loads(out.read_text())["seed"] == 11


def test_fail_verdict_exit_1(tmp_path):
    # forcing s=4 on a pair whose compatibility order is 2 makes the slope miss
    cfg = dict(FAST_RATE, s=4, max_s=4, kernel="bspline:6", analyzer="kernel:bspline:1")
    assert main(["rate", "--config", write_config(tmp_path, cfg)]) == 1


def test_numeric_failure_exit_3(capsys):
    code = main(["approx", "--kernel", "bspline:2", "--level", "40", "--box", "[[0, 1]]", "--shape", "5"])
    assert code == 3
    assert "numeric failure" in capsys.readouterr().err


def test_approx_csv(tmp_path, capsys):
    out = tmp_path / "q.csv"
    code = main(["approx", "--kernel", "bspline:2", "--level", "3", "--box", "[[-1, 1]]", "--shape", "9",
                 "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["shape"] == [9] and summary["error"] < 0.05
    lines = out.read_text().splitlines()
    assert lines[0] == "x0,f,Qf" and len(lines) == 10


def test_moduli(tmp_path):
    out = tmp_path / "m.json"
    assert main(["moduli", "--levels", "1", "2", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert [r["j"] for r in rows] == [1, 2]
    assert rows[1]["modulus"] < rows[0]["modulus"]


def test_atomic_write_replaces(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("old")
    atomic_write(str(path), "new")
    assert path.read_text() == "new"
    assert os.listdir(tmp_path) == ["x.txt"]
