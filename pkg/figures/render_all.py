#!/usr/bin/env python3
"""Driver: regenerate every figure from a directory of exported artifacts.

Expects the file names produced by the main package's acceptance run
(channels_alpha0.csv, fit_alpha0.json, bound_ladder.csv, prediction.json,
scan.csv); any missing input fails with a clear message.
"""

import argparse
from pathlib import Path

import render_scan
import render_spectrum
import render_tail


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--artifacts", default="../artifacts",
                    help="directory with exported CSV/JSON inputs")
    ap.add_argument("--out-dir", default="out", help="output directory for SVGs")
    args = ap.parse_args(argv)
    art = Path(args.artifacts)
    out = Path(args.out_dir)
    rc = render_tail.main([
        "--channels", str(art / "channels_alpha0.csv"),
        "--fit", str(art / "fit_alpha0.json"),
        "--out", str(out / "fig_tail.svg"),
    ])
    rc |= render_spectrum.main([
        "--bound", str(art / "bound_ladder.csv"),
        "--prediction", str(art / "prediction.json"),
        "--out", str(out / "fig_spectrum.svg"),
    ])
    rc |= render_scan.main([
        "--scan", str(art / "scan.csv"),
        "--out", str(out / "fig_scan.svg"),
    ])
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
