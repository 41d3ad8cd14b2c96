import json
import os
import subprocess
import sys

import pytest

PKG_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_cli(*args, **kwargs):
    env = dict(os.environ)
    env["PYTHONPATH"] = os.path.join(PKG_ROOT, "src")
    return subprocess.run(
        [sys.executable, "-m", "skfluct", *args],
        capture_output=True, text=True, env=env, **kwargs,
    )


def test_solve_q_prints_fields():
    proc = run_cli("solve-q", "--beta", "0.5", "--rho", "1", "--alpha", "0.25", "--n", "16")
    assert proc.returncode == 0
    for key in ("q =", "residual =", "lower_bound =", "upper_bound ="):
        assert key in proc.stdout


def test_exact_subcommand():
    proc = run_cli("exact", "--n", "6", "--beta", "0.5", "--rho", "1", "--alpha", "0.25", "--seed", "4")
    assert proc.returncode == 0
    assert "log_zhat =" in proc.stdout
    assert "zhat_subset_sum =" in proc.stdout


def test_beta_validation_exit_code():
    proc = run_cli("clt", "--beta", "1.2", "--n", "10", "--alpha", "0.5", "--replicas", "3")
    assert proc.returncode == 2
    assert "beta < 1" in proc.stderr


def test_unknown_flag_is_usage_error():
    proc = run_cli("clt", "--frobnicate", "3")
    assert proc.returncode == 2


def test_unknown_subcommand_is_usage_error():
    proc = run_cli("no-such-command")
    assert proc.returncode == 2


def test_determinism_of_outputs(tmp_path):
    # identical invocation twice: byte-identical files
    args = ("clt", "--n", "9", "--beta", "0.4", "--alpha", "0.5", "--replicas", "20",
            "--seed", "7", "--out", str(tmp_path / "run"))
    out1 = run_cli(*args)
    first = {
        name: open(tmp_path / "run" / name, "rb").read()
        for name in ("clt_replicas.csv", "clt_summary.json")
    }
    out2 = run_cli(*args)
    assert out1.returncode == 0 and out2.returncode == 0
    strip = lambda s: "\n".join(l for l in s.splitlines() if not l.startswith(("wrote", "elapsed")))
    assert strip(out1.stdout) == strip(out2.stdout)
    for name, before in first.items():
        assert open(tmp_path / "run" / name, "rb").read() == before


def test_config_file_merge_law(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment defaults\nbeta = 0.4\nn = 9\nreplicas = 15\nseed = 5\nalpha = 0.5\n")
    merged = run_cli("clt", "--config", str(cfg), "--replicas", "20")
    direct = run_cli("clt", "--beta", "0.4", "--n", "9", "--alpha", "0.5",
                     "--replicas", "20", "--seed", "5")
    assert merged.returncode == 0
    strip = lambda s: "\n".join(l for l in s.splitlines() if not l.startswith("elapsed"))
    assert strip(merged.stdout) == strip(direct.stdout)


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("zeta = 1\n")
    proc = run_cli("clt", "--config", str(cfg))
    assert proc.returncode == 2
    assert "zeta" in proc.stderr


def test_help_documents_output_schema():
    proc = run_cli("--help")
    assert proc.returncode == 0
    assert "replica_index,raw_value,centered_value" in proc.stdout
    assert "config_echo" in proc.stdout


def test_report_subcommand(tmp_path):
    run_dir = tmp_path / "out"
    proc = run_cli("clt", "--n", "8", "--beta", "0.3", "--alpha", "0.5", "--replicas", "5",
                   "--seed", "1", "--out", str(run_dir))
    assert proc.returncode == 0
    rep = run_cli("report", "--out", str(run_dir))
    assert rep.returncode == 0
    assert "empirical_mean" in rep.stdout
    empty = run_cli("report", "--out", str(tmp_path / "nowhere"))
    assert empty.returncode == 2
