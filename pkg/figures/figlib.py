"""Shared plumbing for the figure recipes: schema checks and deterministic SVG.

Recipes consume only the documented CSV/JSON exports of the main package and
never recompute physics.  Rendering is headless and byte-reproducible:
timestamps are suppressed and the SVG hash salt is pinned.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "trimerlab-figures"

#: scaled-strength prefactor 2 mu / hbar^2 with mu = m / sqrt(3)
TWO_MU = 2.0 / 3.0**0.5


class SchemaError(SystemExit):
    def __init__(self, path, missing):
        super().__init__(f"schema mismatch in {path}: missing column(s) {missing}")


def load_csv(path, required):
    path = Path(path)
    if not path.exists():
        raise SystemExit(f"input not found: {path}")
    df = pd.read_csv(path, comment="#")
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise SchemaError(path, missing)
    if df.empty:
        raise SchemaError(path, ["<no data rows>"])
    return df


def load_json(path, required):
    path = Path(path)
    if not path.exists():
        raise SystemExit(f"input not found: {path}")
    with open(path) as f:
        d = json.load(f)
    missing = [k for k in required if k not in d]
    if missing:
        raise SchemaError(path, missing)
    return d


def save_figure(fig, out_path):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {out_path}")
