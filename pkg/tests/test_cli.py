import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from trimerlab.cli import main
from trimerlab.hyperangular import TWO_MU3


def run(args, tmp_path, cache="cache"):
    return main(list(args) + ["--out-dir", str(tmp_path),
                              "--cache-dir", str(tmp_path / cache)])


def write_synthetic_channels(path, beta=2.0, delta=1.0):
    """channels.csv + sidecar carrying an exact subcritical-log channel."""
    R = np.geomspace(1e2, 1e8, 60)
    W = -np.sqrt(beta * np.log(R) + delta) / (TWO_MU3 * R**2)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["R", "nu", "U", "Q", "W", "conv_est"])
        for r, wv in zip(R, W):
            w.writerow([repr(float(r)), 0, repr(float(wv)), "0.0", repr(float(wv)), "0.0"])
    with open(str(path) + ".json", "w") as f:
        json.dump({
            "model": {"alpha2": 0.0, "r0": 1.0, "cutoff": "sech2",
                      "sector": {"statistics": "boson", "J": 0, "parity": 1}},
            "mesh_policy": {"nodes_across_feature": 8, "core_extent": 2.0,
                            "growth": 1.2, "far_spans_theta": 24, "far_spans_phi": 18,
                            "quad_points": 6, "eps_floor": 1e-12, "pseudo_eps_none": 1e-3},
            "dlnR": 0.02,
            "n_channels": 1,
        }, f)


def test_massratio_command(tmp_path, capsys):
    rc = run(["massratio", "--alpha2", "2.0", "--out", str(tmp_path / "mr.json")], tmp_path)
    assert rc == 0
    out = capsys.readouterr().out
    assert "13.607" in out
    saved = json.loads((tmp_path / "mr.json").read_text())
    assert abs(saved["mass_ratio"] - 13.607) < 0.01


def test_twobody_command_and_cache(tmp_path, capsys):
    args = ["twobody", "--alpha2", "1.0", "--l", "0", "--nlevels", "3",
            "--rmin", "1e-3", "--rmax", "1e8", "--out", "twobody.csv"]
    assert run(args, tmp_path) == 0
    cold = (tmp_path / "twobody.csv").read_bytes()
    cold_side = (tmp_path / "twobody.csv.json").read_bytes()
    (tmp_path / "twobody.csv").unlink()
    assert run(args, tmp_path) == 0
    assert "cache hit" in capsys.readouterr().out
    assert (tmp_path / "twobody.csv").read_bytes() == cold
    assert (tmp_path / "twobody.csv.json").read_bytes() == cold_side
    rows = [r for r in csv.reader(
        (tmp_path / "twobody.csv").read_text().splitlines()[1:]) ]
    assert rows[0] == ["v", "l", "E", "r_mean", "nodes"]
    assert len(rows) == 4


def test_fit_bound_predict_pipeline(tmp_path):
    write_synthetic_channels(tmp_path / "channels.csv", beta=2.0, delta=1.0)
    rc = run(["fit", "--from", str(tmp_path / "channels.csv"),
              "--form", "subcritical-log", "--window", "1e2", "1e8",
              "--out", "fit.json"], tmp_path)
    assert rc == 0
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert abs(fit["params"]["beta"] - 2.0) < 1e-8
    assert abs(fit["params"]["delta"] - 1.0) < 1e-8

    rc = run(["bound", "--model-tail", str(tmp_path / "fit.json"),
              "--wall", "100", "--nmax", "6", "--out", "bound.csv"], tmp_path)
    assert rc == 0
    lines = (tmp_path / "bound.csv").read_text().splitlines()
    assert lines[1] == "n,E,R_mean,nodes,Rin,Rout,truncated"
    first = lines[2].split(",")
    assert int(first[0]) == 0 and float(first[1]) < 0

    rc = run(["predict", "--from-fit", str(tmp_path / "fit.json"),
              "--from-bound", str(tmp_path / "bound.csv"),
              "--nmax", "6", "--out", "prediction.json"], tmp_path)
    assert rc == 0
    pred = json.loads((tmp_path / "prediction.json").read_text())
    assert len(pred["energies"]) == 7
    assert all(0 < r < 1 for r in pred["ratios"])


def test_bound_with_table_and_splice(tmp_path):
    write_synthetic_channels(tmp_path / "channels.csv")
    run(["fit", "--from", str(tmp_path / "channels.csv"),
         "--form", "subcritical-log", "--window", "1e2", "1e8",
         "--out", "fit.json"], tmp_path)
    rc = run(["bound", "--from", str(tmp_path / "channels.csv"),
              "--channel", "0", "--wall", "100",
              "--splice-tail", str(tmp_path / "fit.json"),
              "--nmax", "4", "--out", "bound2.csv"], tmp_path)
    assert rc == 0
    side = json.loads((tmp_path / "bound2.csv.json").read_text())
    assert side["n_states"] == 4


def test_invalid_config_exit_code(tmp_path):
    assert run(["twobody", "--l", "0"], tmp_path) == 2  # alpha2 missing
    bad = tmp_path / "bad.json"
    bad.write_text("[1,2,3]")
    assert run(["twobody", "--config", str(bad)], tmp_path) == 2


def test_unsupported_sector_exit_code(tmp_path):
    rc = run(["channels", "--alpha2", "0.0", "--sector", "fermion",
              "--rmin", "10", "--rmax", "100", "--per-decade", "3",
              "--nchan", "1"], tmp_path)
    assert rc == 4


def test_convergence_failure_exit_code(tmp_path):
    # two-body ladder cannot fit 6 levels below rmax = 1e3
    rc = run(["twobody", "--alpha2", "1.0", "--nlevels", "6",
              "--rmin", "1e-3", "--rmax", "1e3"], tmp_path)
    assert rc == 3
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert diag["error"] == "DomainTooSmallError"


@pytest.mark.slow
def test_channels_command_cold_warm_identical(tmp_path, capsys):
    args = ["channels", "--alpha2", "-0.25", "--rmin", "10", "--rmax", "40",
            "--per-decade", "4", "--nchan", "2", "--out", "channels.csv"]
    assert run(args, tmp_path) == 0
    cold = (tmp_path / "channels.csv").read_bytes()
    assert run(args, tmp_path) == 0
    assert "cache hit" in capsys.readouterr().out
    assert (tmp_path / "channels.csv").read_bytes() == cold
    header = cold.decode().splitlines()
    assert header[0].startswith("# manifest_hash=")
    assert header[1] == "R,nu,U,Q,W,conv_est"
