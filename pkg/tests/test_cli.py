import json

import numpy as np
import pytest

from twistlab.cli import EXIT_NOCONV, EXIT_THRESHOLD, EXIT_USAGE, main, sweep
from twistlab.periodic import PeriodicFn, grid


def run(tmp_path, *argv):
    return main(list(argv))


def test_solve_report(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--lambda", "0.25", "--kappa", "0.2", "--alpha1", "0.38", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["converged"] and abs(rep["lip_phi"] - 0.2) < 1e-3 and rep["lip_phi"] <= 0.25
    for key in ("lambda", "alpha1", "alpha2", "iterations", "residual_inv", "residual_fe", "lip_cert", "rho"):
        assert key in rep
    assert PeriodicFn.from_csv(out / "graph.csv").n == 4096


def test_threshold_refusal(tmp_path):
    assert main(["solve", "--lambda", "0.25", "--kappa", "1.2", "--out", str(tmp_path)]) == EXIT_THRESHOLD


def test_nonconvergence(tmp_path):
    code = main(["solve", "--lambda", "0.81", "--kappa", "0.01", "--max-iter", "2", "--out", str(tmp_path)])
    assert code == EXIT_NOCONV


def test_bad_flag(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--bogus", "--out", str(tmp_path)])
    assert exc.value.code == EXIT_USAGE


def test_phi_file_mean_rejected(tmp_path, capsys):
    f = tmp_path / "phi.csv"
    PeriodicFn(0.01 + 0.02 * np.sin(2 * np.pi * grid(256))).to_csv(f)
    assert main(["solve", "--phi-file", str(f), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert "subtract its mean" in capsys.readouterr().err


def test_config_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nlambda = 0.5\nkappa = 0.05\nn = 1024\n")
    out = tmp_path / "o"
    assert main(["solve", "--config", str(cfg), "--kappa", "0.06", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["lambda"] == 0.5 and abs(rep["lip_phi"] - 0.06) < 1e-3


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = red\n")
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE


def test_manifest_replay_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--lambda", "0.5", "--kappa", "0.08", "--alpha2", "0.1", "--n", "1024", "--out", str(a)]) == 0
    assert main(["solve", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert (a / "graph.csv").read_bytes() == (b / "graph.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["params"] == mb["params"]


def test_manifest_complete(tmp_path):
    import argparse

    from twistlab.cli import _META, build_parser, parse

    assert main(["rotnum", "--lambda", "0.5", "--n", "512", "--n-iter", "2000", "--out", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    args = parse(["rotnum", "--out", str(tmp_path)])
    assert set(man["params"]) == set(vars(args)) - _META
    assert {"tool", "version", "command", "params", "backend", "seeds"} <= set(man)


def test_manifest_wrong_command(tmp_path):
    assert main(["solve", "--n", "256", "--out", str(tmp_path)]) == 0
    assert main(["rotnum", "--manifest", str(tmp_path / "manifest.json"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_tune(tmp_path):
    assert main(["tune", "--lambda", "0.5", "--alpha2", "0.15", "--n", "256", "--omega", "0.45",
                 "--rho-iter", "65536", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "tune.json").read_text())
    assert set(rep) == {"target", "achieved", "parameter", "vary", "iterations"}
    assert abs(rep["parameter"] - 0.3) < 1e-6


def test_cone_check(tmp_path):
    assert main(["cone-check", "--lambda", "0.25", "--kappa", "0.2", "--n", "1024", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "cone.json").read_text())
    assert rep["analytic_pass"] and rep["slope_jumps"] == []


def test_arnold(tmp_path):
    assert main(["arnold", "--n", "50", "--lambda", "0.25", "--scan=-0.04,0.04,81", "--q-max", "3",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "plateaus.csv").read_text().splitlines()
    assert lines[0] == "lo,hi,p,q" and any(line.endswith(",0,1") for line in lines[1:])


def test_arnold_small_order(tmp_path):
    assert main(["arnold", "--n", "3", "--out", str(tmp_path)]) == EXIT_THRESHOLD


def test_denjoy_outputs(tmp_path):
    assert main(["denjoy", "--lambda", "0.5", "--N", "200", "--K", "400", "--grid-n", "16384",
                 "--out", str(tmp_path)]) == 0
    for name in ("g.csv", "h.csv", "psi.csv", "phi.csv", "graph.csv", "report.json", "manifest.json"):
        assert (tmp_path / name).exists()
    rep = json.loads((tmp_path / "report.json").read_text())
    assert "checks" in rep and rep["checks"]["rho_III"]


def test_denjoy_invalid(tmp_path):
    assert main(["denjoy", "--N", "10", "--out", str(tmp_path)]) == EXIT_THRESHOLD


def test_sweep_files(tmp_path):
    assert main(["sweep", "--lambdas", "0.25", "--kappas", "0,0.1,0.2,0.25,0.6", "--n", "256",
                 "--out", str(tmp_path)]) == 0
    atlas = (tmp_path / "atlas.csv").read_text().splitlines()
    assert atlas[0] == "lambda,kappa,status,iterations,lip_cert,below_threshold" and len(atlas) == 6
    assert (tmp_path / "curves.csv").read_text().startswith("lambda,lip_threshold,bohr\n")
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["all_below_threshold_converged"]
    assert rep["gap"]["0.25"] == pytest.approx(0.8611, abs=1e-4)


def test_sweep_thread_independent():
    rows1, s1 = sweep([0.25, 0.5], [0.0, 0.1, 0.3, 0.8], n=256, threads=1)
    rows4, s4 = sweep([0.25, 0.5], [0.0, 0.1, 0.3, 0.8], n=256, threads=4)
    assert rows1 == rows4 and s1 == s4


def test_module_entry():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "twistlab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "twistlab" in out.stdout
