import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

FIGDIR = Path(__file__).resolve().parent.parent
TWO_MU = 2.0 / 3.0**0.5


def _write_channels(path, beta=2.0, delta=1.0):
    R = np.geomspace(1e2, 1e8, 50)
    W = -np.sqrt(beta * np.log(R) + delta) / (TWO_MU * R**2)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["R", "nu", "U", "Q", "W", "conv_est"])
        for r, wv in zip(R, W):
            w.writerow([repr(float(r)), 0, repr(float(wv)), "0.0",
                        repr(float(wv)), "0.0"])


def _write_scan(path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["alpha2", "n", "E", "E_rel", "threshold", "truncated", "error"])
        for i, a2 in enumerate(np.linspace(-0.02, 0.2, 12)):
            thr = repr(-1e-6 * np.exp(40 * a2)) if a2 > 0 else ""
            for n in range(4):
                e = -1e-5 * np.exp(30 * a2) * (1e-3) ** n
                w.writerow([repr(float(a2)), n, repr(float(e)), repr(float(e)),
                            thr, 0, ""])


@pytest.fixture(scope="session")
def fixture_artifacts(tmp_path_factory):
    """Small schema-conforming inputs; fit/bound/prediction come from the CLI."""
    art = tmp_path_factory.mktemp("artifacts")
    _write_channels(art / "channels_alpha0.csv")
    _write_scan(art / "scan.csv")
    sidecar = {
        "model": {"alpha2": 0.0, "r0": 1.0, "cutoff": "sech2",
                  "sector": {"statistics": "boson", "J": 0, "parity": 1}},
        "mesh_policy": {"nodes_across_feature": 8, "core_extent": 2.0,
                        "growth": 1.2, "far_spans_theta": 24, "far_spans_phi": 18,
                        "quad_points": 6, "eps_floor": 1e-12, "pseudo_eps_none": 1e-3},
        "dlnR": 0.02, "n_channels": 1,
    }
    with open(art / "channels_alpha0.csv.json", "w") as f:
        json.dump(sidecar, f)

    def cli(*args):
        subprocess.run([sys.executable, "-m", "trimerlab.cli", *args,
                        "--out-dir", str(art), "--no-cache"],
                       check=True, cwd=str(art))

    cli("fit", "--from", str(art / "channels_alpha0.csv"),
        "--form", "subcritical-log", "--window", "1e2", "1e8",
        "--out", "fit_alpha0.json")
    cli("bound", "--model-tail", str(art / "fit_alpha0.json"),
        "--wall", "100", "--nmax", "8", "--out", "bound_ladder.csv")
    cli("predict", "--from-fit", str(art / "fit_alpha0.json"),
        "--from-bound", str(art / "bound_ladder.csv"),
        "--nmax", "8", "--out", "prediction.json")
    return art


@pytest.fixture()
def run_recipe():
    def run(script, *args):
        return subprocess.run(
            [sys.executable, str(FIGDIR / script), *args],
            capture_output=True, text=True, cwd=str(FIGDIR),
        )
    return run
