import json
import shutil
import subprocess
import sys

import pytest

from bergman_lab.cli import main
from bergman_lab.regression import default_path

KEY = "kernel-diff.max|n=1|p=-|q=-|alpha=0|gamma=-|delta=4"


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "bergman_lab.cli", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture
def reg(tmp_path):
    path = tmp_path / "regression.json"
    shutil.copy(default_path(), path)
    return path


def test_list_and_help(capsys):
    assert main(["list"]) == 0
    assert "geometry-identities" in capsys.readouterr().out
    assert run("--help").returncode == 0


def test_success_writes_outputs(tmp_path):
    out = tmp_path / "geo"
    proc = run("geometry-identities", "--n", 1, "--out", out)
    assert proc.returncode == 0, proc.stderr
    assert {p.name for p in out.iterdir()} == {"results.csv", "summary.json", "run.log"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["criterion"] == 1 and summary["config"]["n"] == 1
    assert (out / "results.csv").read_text().startswith("n,identity,rmax,")
    assert "backend" in (out / "run.log").read_text()


def test_breach_exits_nonzero_with_failed_suffix(tmp_path, reg):
    data = json.loads(reg.read_text())
    data["constants"][KEY]["value"] = 1e-6
    reg.write_text(json.dumps(data))
    out = tmp_path / "kd"
    proc = run("kernel-difference", "--n", 1, "--out", out, "--regression", reg)
    assert proc.returncode == 1
    assert {p.name for p in out.iterdir()} == {"results.csv.failed", "summary.json.failed", "run.log.failed"}
    assert not json.loads((out / "summary.json.failed").read_text())["passed"]
    shutil.copy(default_path(), reg)
    assert run("kernel-difference", "--n", 1, "--out", out, "--regression", reg).returncode == 0
    assert {p.name for p in out.iterdir()} == {"results.csv", "summary.json", "run.log"}


def test_missing_constant_refused_then_frozen(tmp_path):
    reg = tmp_path / "empty.json"
    out = tmp_path / "cr"
    proc = run("cr-synthesis", "--out", out, "--regression", reg)
    assert proc.returncode == 3 and "--freeze" in proc.stderr
    assert (out / "run.log.failed").exists() and not reg.exists()
    assert run("cr-synthesis", "--out", out, "--regression", reg, "--freeze").returncode == 0
    keys = json.loads(reg.read_text())["constants"]
    assert any(k.startswith("cr-atom-norm.max") for k in keys)
    assert run("cr-synthesis", "--out", out, "--regression", reg).returncode == 0


def test_freeze_refuses_shrink_and_force_audits(tmp_path, reg):
    data = json.loads(reg.read_text())
    data["constants"][KEY]["value"] = 1e6
    reg.write_text(json.dumps(data))
    out = tmp_path / "kd"
    assert run("kernel-difference", "--n", 1, "--out", out, "--regression", reg, "--freeze").returncode == 0
    assert json.loads(reg.read_text())["constants"][KEY]["value"] == 1e6
    assert KEY in json.loads((out / "summary.json").read_text())["refused_shrinks"]
    assert run("kernel-difference", "--n", 1, "--out", out, "--regression", reg, "--force").returncode != 0
    proc = run("kernel-difference", "--n", 1, "--out", out, "--regression", reg, "--freeze", "--force")
    assert proc.returncode == 0
    assert json.loads(reg.read_text())["constants"][KEY]["value"] < 10
    audit = (tmp_path / "regression_audit.log").read_text().splitlines()
    assert json.loads(audit[0])["key"] == KEY


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "lab.toml"
    cfg.write_text('n = 2\nseed = 7\nout = "%s"\n' % (tmp_path / "fromcfg").as_posix())
    assert run("invariant-gradient", "--config", cfg).returncode == 0
    s = json.loads((tmp_path / "fromcfg" / "summary.json").read_text())
    assert s["config"]["n"] == 2 and s["config"]["seed"] == 7
    assert run("invariant-gradient", "--config", cfg, "--n", 1, "--out", tmp_path / "flag").returncode == 0
    s = json.loads((tmp_path / "flag" / "summary.json").read_text())
    assert s["config"]["n"] == 1 and s["config"]["seed"] == 7
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 3\n")
    assert run("invariant-gradient", "--config", bad).returncode != 0


def test_argument_validation():
    assert run("geometry-identities", "--seed", "-1").returncode == 2
    assert run("geometry-identities", "--n", "3").returncode == 2
    assert run("no-such-experiment").returncode == 2


def test_seed_changes_output_and_repeats_are_identical(tmp_path):
    outs = []
    for seed, name in ((1, "a"), (1, "b"), (2, "c")):
        assert run("tau-invariance", "--n", 1, "--seed", seed, "--out", tmp_path / name).returncode == 0
        outs.append((tmp_path / name / "results.csv").read_bytes())
    assert outs[0] == outs[1] != outs[2]
