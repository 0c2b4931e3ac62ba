#!/usr/bin/env python3
"""Spectrum-vs-strength figure: the lowest three-body energies across the
pair-strength grid with the lowest two-body threshold as a dashed line.

Input: scan.csv (columns alpha2,n,E,E_rel,threshold,truncated,error).
"""

import argparse

import numpy as np

from figlib import load_csv, save_figure


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scan", required=True, help="scan.csv from `trimerlab scan`")
    ap.add_argument("--out", default="fig_scan.svg")
    args = ap.parse_args(argv)

    df = load_csv(args.scan, ["alpha2", "n", "E", "threshold"])
    df = df[df["E"].notna()]

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    colors = ["tab:blue", "tab:orange", "tab:green", "tab:purple"]
    for n in sorted(df["n"].unique()):
        sel = df[df["n"] == n].sort_values("alpha2")
        ax.plot(sel["alpha2"], np.log10(np.abs(sel["E"])), "o-", ms=3.5,
                lw=0.8, color=colors[int(n) % len(colors)], label=f"$n={int(n)}$")
    thr = df[df["threshold"].notna()].groupby("alpha2")["threshold"].first()
    if len(thr):
        ax.plot(thr.index, np.log10(np.abs(thr.to_numpy())), "k--", lw=1.0,
                label="two-body threshold")
    ax.axvline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel(r"pair strength $\alpha^2$")
    ax.set_ylabel(r"$\log_{10} |E|$")
    ax.legend(frameon=False, fontsize=8, ncol=2)
    fig.tight_layout()
    save_figure(fig, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
