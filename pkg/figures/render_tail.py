#!/usr/bin/env python3
"""Tail-linearity figure: (2 mu R^2 |W|)^2 against ln(R/r0) for channel 0.

Inputs: channels.csv (columns R,nu,U,Q,W,conv_est) and optionally fit.json
(subcritical-log TailFit) whose straight line is overlaid.  On these axes the
channel tail is a straight line wherever the square-root-log form holds.
"""

import argparse

import numpy as np

from figlib import TWO_MU, load_csv, load_json, save_figure


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--channels", required=True, help="channels.csv from `trimerlab channels`")
    ap.add_argument("--fit", default=None, help="fit.json from `trimerlab fit` (optional)")
    ap.add_argument("--channel", type=int, default=0)
    ap.add_argument("--r0", type=float, default=1.0)
    ap.add_argument("--out", default="fig_tail.svg")
    args = ap.parse_args(argv)

    df = load_csv(args.channels, ["R", "nu", "W"])
    ch = df[df["nu"] == args.channel]
    R = ch["R"].to_numpy()
    W = ch["W"].to_numpy()
    neg = W < 0
    t = np.log(R[neg] / args.r0)
    y = (TWO_MU * R[neg] ** 2 * np.abs(W[neg])) ** 2

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(t, y, "o", ms=4, mfc="none", color="tab:blue", label="channel table")
    if args.fit:
        fit = load_json(args.fit, ["form", "params"])
        beta = fit["params"]["beta"]
        delta = fit["params"]["delta"]
        tt = np.linspace(t.min(), t.max(), 200)
        ax.plot(tt, beta * tt + delta, "-", color="tab:red",
                label=rf"fit: $\beta$={beta:.4g}, $\delta$={delta:.4g}")
    ax.set_xlabel(r"$\ln(R/r_0)$")
    ax.set_ylabel(r"$(2\mu R^2 |W_{00}| / \hbar^2)^2$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    save_figure(fig, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
