#!/usr/bin/env python3
"""Ladder comparison figure: numerical bound-state energies (circles) against
the recursive spectrum prediction (triangles) on a log-magnitude axis.

Inputs: bound.csv (columns n,E,R_mean,nodes,Rin,Rout,truncated) and
prediction.json ({beta, r_mean0, e0, energies, ratios}).
"""

import argparse

import numpy as np

from figlib import load_csv, load_json, save_figure


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bound", required=True, help="bound.csv from `trimerlab bound`")
    ap.add_argument("--prediction", required=True,
                    help="prediction.json from `trimerlab predict`")
    ap.add_argument("--out", default="fig_spectrum.svg")
    args = ap.parse_args(argv)

    df = load_csv(args.bound, ["n", "E"])
    pred = load_json(args.prediction, ["energies"])
    n_num = df["n"].to_numpy()
    e_num = np.abs(df["E"].to_numpy())
    e_pred = np.abs(np.asarray(pred["energies"], dtype=float))

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.semilogy(n_num, e_num, "o", ms=5, mfc="none", color="tab:blue",
                label="hyperradial solve")
    ax.semilogy(np.arange(e_pred.size), e_pred, "^", ms=5, mfc="none",
                color="tab:red", label="recursion")
    ax.plot(n_num, e_num, "-", lw=0.6, color="tab:blue", alpha=0.5)
    ax.plot(np.arange(e_pred.size), e_pred, "-", lw=0.6, color="tab:red", alpha=0.5)
    ax.set_xlabel("level $n$")
    ax.set_ylabel(r"$|E_n|$  [$\hbar^2 / (m\, r_0^2)$]")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    save_figure(fig, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
