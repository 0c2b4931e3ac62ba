"""Command-line orchestration: pipelines, result cache, CSV/JSON exports.

Subcommands: channels, twobody, bound, fit, scan, predict, massratio.
Exit codes: 0 success; 2 invalid configuration; 3 convergence failure
(diagnostics JSON emitted); 4 unsupported symmetry sector.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cache import ResultCache, manifest_hash, resolve_cache_dir
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainTooSmallError,
    FitWindowError,
    MeshResolutionError,
    RadicandError,
    SingularInputError,
    TableRangeError,
    UnsupportedSectorError,
)
from .model import BOSON_0P, FERMION_1P, CutoffForm, ModelConfig, SymmetrySector

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_SECTOR = 4


def _model_from_args(args, cfg_json: dict) -> ModelConfig:
    def pick(name, default):
        v = getattr(args, name, None)
        if v is not None:
            return v
        return cfg_json.get(name, default)

    sector_raw = pick("sector", "boson")
    if isinstance(sector_raw, dict):
        sector = SymmetrySector.from_dict(sector_raw)
    elif sector_raw == "boson":
        sector = BOSON_0P
    elif sector_raw == "fermion":
        sector = FERMION_1P
    else:
        raise ConfigError(f"unknown sector {sector_raw!r}")
    alpha2 = pick("alpha2", None)
    if alpha2 is None:
        raise ConfigError("alpha2 is required (flag --alpha2 or config key)")
    try:
        cutoff = CutoffForm(pick("cutoff", "sech2"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ModelConfig(alpha2=float(alpha2), r0=float(pick("r0", 1.0)),
                       cutoff=cutoff, sector=sector)


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path) as f:
        d = json.load(f)
    if not isinstance(d, dict):
        raise ConfigError("config file must hold a JSON object")
    return d


def _grid(rmin, rmax, per_decade) -> np.ndarray:
    if not (0 < rmin < rmax):
        raise ConfigError("need 0 < rmin < rmax")
    n = max(int(round(per_decade * math.log10(rmax / rmin))) + 1, 4)
    return np.geomspace(rmin, rmax, n)


class _Run:
    """Cache-aware execution of one subcommand."""

    def __init__(self, args, manifest: dict, outputs: list):
        self.args = args
        self.out_dir = Path(getattr(args, "out_dir", ".") or ".")
        self.manifest = dict(manifest)
        self.manifest["subcommand"] = args.command
        self.manifest["version"] = __version__
        self.key = manifest_hash(self.manifest)
        self.outputs = outputs
        self.cache = ResultCache(resolve_cache_dir(getattr(args, "cache_dir", None)))

    def cached(self) -> bool:
        if getattr(self.args, "no_cache", False):
            return False
        if self.cache.has(self.key):
            self.cache.fetch(self.key, self.out_dir)
            return True
        return False

    def finalize(self, t0: float):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        record = dict(self.manifest)
        record["wall_clock_s"] = time.time() - t0
        record["outputs"] = self.outputs
        if not getattr(self.args, "no_cache", False):
            self.cache.store(self.key, record,
                             {n: self.out_dir / n for n in self.outputs})

    def sidecar_extra(self) -> dict:
        return {"manifest": self.manifest, "manifest_hash": self.key}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_channels(args) -> int:
    from .hyperangular import MeshPolicy, channel_table

    cfg_json = _load_config(args.config)
    cfg = _model_from_args(args, cfg_json)
    grid = _grid(args.rmin, args.rmax, args.per_decade)
    out = args.out
    manifest = {
        "model": cfg.to_dict(),
        "rmin": args.rmin,
        "rmax": args.rmax,
        "per_decade": args.per_decade,
        "nchan": args.nchan,
        "dlnr": args.dlnr,
    }
    run = _Run(args, manifest, [out, out + ".json"])
    if run.cached():
        print(f"channels: cache hit {run.key[:12]} -> {out}")
        return EXIT_OK
    t0 = time.time()
    table = channel_table(cfg, grid, n_channels=args.nchan, policy=MeshPolicy(),
                          dlnR=args.dlnr, workers=args.threads)
    run.out_dir.mkdir(parents=True, exist_ok=True)
    table.save(run.out_dir / out, run.out_dir / (out + ".json"), manifest_hash=run.key)
    run.finalize(t0)
    print(f"channels: {len(grid)} radii x {args.nchan} channels -> {out} "
          f"[{time.time()-t0:.1f}s]")
    return EXIT_OK


def cmd_twobody(args) -> int:
    from .twobody import solve_two_body

    cfg_json = _load_config(args.config)
    cfg = _model_from_args(args, cfg_json)
    out = args.out
    manifest = {
        "model": cfg.to_dict(),
        "l": args.l,
        "nlevels": args.nlevels,
        "rmin": args.rmin,
        "rmax": args.rmax,
        "tol": args.tol,
    }
    run = _Run(args, manifest, [out, out + ".json"])
    if run.cached():
        print(f"twobody: cache hit {run.key[:12]} -> {out}")
        return EXIT_OK
    t0 = time.time()
    levels = solve_two_body(cfg, l=args.l, n_levels=args.nlevels,
                            domain=(args.rmin, args.rmax), tol=args.tol)
    run.out_dir.mkdir(parents=True, exist_ok=True)
    levels.to_csv(run.out_dir / out, manifest_hash=run.key)
    levels.write_sidecar(run.out_dir / (out + ".json"), extra=run.sidecar_extra())
    run.finalize(t0)
    print(f"twobody: {len(levels)} levels (l={args.l}) -> {out}")
    return EXIT_OK


def cmd_bound(args) -> int:
    from .analysis import TailFit
    from .hyperangular import ChannelTable
    from .hyperradial import ModelTail, PotentialSource, solve_bound_states

    manifest = {
        "wall": args.wall,
        "nmax": args.nmax,
        "tol": args.tol,
        "channel": args.channel,
    }
    tail = None
    if args.splice_tail:
        fit = TailFit.load(args.splice_tail)
        tail = ModelTail.from_fit(fit)
        manifest["tail"] = tail.to_dict()
    if args.model_tail:
        fit = TailFit.load(args.model_tail)
        tail = ModelTail.from_fit(fit)
        manifest["tail"] = tail.to_dict()
        manifest["source"] = "model"
    elif args.table:
        manifest["source"] = {"table": str(args.table)}
    else:
        raise ConfigError("bound needs --from <channels.csv> or --model-tail <fit.json>")
    out = args.out
    run = _Run(args, manifest, [out, out + ".json"])
    if run.cached():
        print(f"bound: cache hit {run.key[:12]} -> {out}")
        return EXIT_OK
    t0 = time.time()
    if args.model_tail:
        src = PotentialSource.from_model(tail, wall=args.wall)
    else:
        table = ChannelTable.load(args.table)
        manifest["source"] = {"table_hash": table.content_hash()}
        src = PotentialSource.from_table(table, args.channel, wall=args.wall,
                                         tail=tail, splice_R=args.splice_at)
    states = solve_bound_states(src, args.nmax, tol=args.tol)
    run.out_dir.mkdir(parents=True, exist_ok=True)
    states.to_csv(run.out_dir / out, manifest_hash=run.key)
    states.write_sidecar(run.out_dir / (out + ".json"), extra=run.sidecar_extra())
    run.finalize(t0)
    flag = " (truncated)" if states.truncated else ""
    print(f"bound: {len(states)} states{flag} -> {out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    from .analysis import fit_fermion_tail, fit_subcritical_tail, fit_threshold_tail
    from .hyperangular import ChannelTable
    from .twobody import lowest_threshold

    table = ChannelTable.load(args.table)
    window = (args.window[0], args.window[1])
    manifest = {
        "form": args.form,
        "window": list(window),
        "channel": args.channel,
        "table_hash": table.content_hash(),
    }
    out = args.out
    run = _Run(args, manifest, [out])
    if run.cached():
        print(f"fit: cache hit {run.key[:12]} -> {out}")
        return EXIT_OK
    t0 = time.time()
    R, W = table.R, table.W[args.channel]
    src_hash = table.content_hash()
    if args.form == "subcritical-log":
        fit = fit_subcritical_tail(R, W, window, table.cfg.r0, source_hash=src_hash)
    elif args.form == "threshold":
        e_th = args.ethreshold
        if e_th is None:
            e_th = lowest_threshold(table.cfg, l=0,
                                    domain=(1e-4 * table.cfg.r0, 1e12 * table.cfg.r0))
        fit = fit_threshold_tail(R, W, e_th, window, source_hash=src_hash)
    elif args.form == "fermion-log":
        fit = fit_fermion_tail(R, W, window, table.cfg.r0, source_hash=src_hash)
    else:
        raise ConfigError(f"unknown fit form {args.form!r}")
    run.out_dir.mkdir(parents=True, exist_ok=True)
    fit.save(run.out_dir / out)
    run.finalize(t0)
    params = ", ".join(f"{k}={v:.6g}" for k, v in fit.params.items())
    print(f"fit[{args.form}]: {params} (R^2={fit.r_squared:.5f}) -> {out}")
    return EXIT_OK


def cmd_scan(args) -> int:
    from .hyperradial import spectrum_scan

    cfg_json = _load_config(args.config)
    cfg = _model_from_args(args, cfg_json) if args.alpha2 is not None else ModelConfig(
        alpha2=0.0, r0=float(cfg_json.get("r0", args.r0 or 1.0)),
        cutoff=CutoffForm(cfg_json.get("cutoff", args.cutoff or "sech2")))
    lo, hi, step = args.alpha2_grid
    n = int(round((hi - lo) / step)) + 1
    alphas = [round(lo + i * step, 12) for i in range(n)]
    manifest = {
        "model": cfg.to_dict(),
        "alpha2_grid": alphas,
        "wall": args.wall,
        "nstates": args.nstates,
        "rmax_table": args.rmax_table,
        "per_decade": args.per_decade,
    }
    out = args.out
    run = _Run(args, manifest, [out, out + ".json"])
    if run.cached():
        print(f"scan: cache hit {run.key[:12]} -> {out}")
        return EXIT_OK
    t0 = time.time()
    res = spectrum_scan(cfg, alphas, wall=args.wall, n_states=args.nstates,
                        r_table_max=args.rmax_table, per_decade=args.per_decade,
                        workers=args.threads)
    run.out_dir.mkdir(parents=True, exist_ok=True)
    res.to_csv(run.out_dir / out, manifest_hash=run.key)
    res.write_sidecar(run.out_dir / (out + ".json"), extra=run.sidecar_extra())
    run.finalize(t0)
    n_err = sum(1 for p in res.points if p.error)
    print(f"scan: {len(alphas)} alpha2 points ({n_err} failures) -> {out} "
          f"[{time.time()-t0:.1f}s]")
    return EXIT_OK


def cmd_predict(args) -> int:
    from .analysis import TailFit, predict_spectrum

    if args.from_fit:
        fit = TailFit.load(args.from_fit)
        beta = fit.params["beta"]
        r0 = fit.r0
    else:
        beta = args.beta
        r0 = args.r0 or 1.0
    if args.from_bound:
        import csv as _csv

        with open(args.from_bound) as f:
            rows = [r for r in _csv.reader(line for line in f if not line.startswith("#"))]
        head = rows[0]
        first = dict(zip(head, rows[1]))
        e0 = float(first["E"])
        rm0 = float(first["R_mean"])
    else:
        e0, rm0 = args.e0, args.rmean0
    if beta is None or e0 is None or rm0 is None:
        raise ConfigError("predict needs beta, e0, rmean0 (flags or --from-fit/--from-bound)")
    manifest = {"beta": beta, "e0": e0, "rmean0": rm0, "nmax": args.nmax, "r0": r0}
    out = args.out
    run = _Run(args, manifest, [out])
    if run.cached():
        print(f"predict: cache hit {run.key[:12]} -> {out}")
        return EXIT_OK
    t0 = time.time()
    pred = predict_spectrum(beta, rm0, e0, args.nmax, r0=r0)
    run.out_dir.mkdir(parents=True, exist_ok=True)
    pred.save(run.out_dir / out)
    run.finalize(t0)
    print(f"predict: {len(pred.energies)} levels -> {out}")
    return EXIT_OK


def cmd_massratio(args) -> int:
    from .analysis import alpha2_to_mass_ratio, mass_ratio_to_alpha2

    if args.mass_ratio is not None:
        a2 = mass_ratio_to_alpha2(args.mass_ratio)
        print(f"alpha2 = {a2:.6f} +- 1e-6 (mass ratio {args.mass_ratio:g})")
        value = {"alpha2": a2, "mass_ratio": args.mass_ratio}
    else:
        if args.alpha2 is None:
            raise ConfigError("massratio needs --alpha2 or --mass-ratio")
        mr = alpha2_to_mass_ratio(args.alpha2)
        print(f"m_H/m_L = {mr:.4f} +- 0.0001 (alpha2 = {args.alpha2:g})")
        value = {"alpha2": args.alpha2, "mass_ratio": mr}
    if args.out:
        with open(args.out, "w") as f:
            json.dump(value, f, indent=2, sort_keys=True)
            f.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--cache-dir", default=None,
                   help=f"cache directory (default env {resolve_cache_dir().name} or ./.trimerlab-cache)")
    p.add_argument("--no-cache", action="store_true", help="bypass the result cache")
    p.add_argument("--threads", type=int, default=1, help="worker processes for parallel maps")


def _add_model(p):
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--r0", type=float, default=None)
    p.add_argument("--cutoff", choices=[c.value for c in CutoffForm], default=None)
    p.add_argument("--sector", choices=["boson", "fermion"], default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trimerlab",
                                 description="three-body inverse-square spectrum engine")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channels", help="adiabatic channel table U, Q, W over an R grid")
    _add_common(p); _add_model(p)
    p.add_argument("--rmin", type=float, default=10.0)
    p.add_argument("--rmax", type=float, default=1e6)
    p.add_argument("--per-decade", type=int, default=8, dest="per_decade")
    p.add_argument("--nchan", type=int, default=1)
    p.add_argument("--dlnr", type=float, default=0.02)
    p.add_argument("--out", default="channels.csv")
    p.set_defaults(func=cmd_channels)

    p = sub.add_parser("twobody", help="two-body bound ladder E, <r>")
    _add_common(p); _add_model(p)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--nlevels", type=int, default=4)
    p.add_argument("--rmin", type=float, default=1e-3)
    p.add_argument("--rmax", type=float, default=1e10)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default="twobody.csv")
    p.set_defaults(func=cmd_twobody)

    p = sub.add_parser("bound", help="hyperradial bound states of one channel")
    _add_common(p)
    p.add_argument("--from", dest="table", help="channels.csv produced by `channels`")
    p.add_argument("--model-tail", dest="model_tail",
                   help="fit.json interpreted as a pure analytic potential")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--wall", type=float, default=None, help="hard-wall radius")
    p.add_argument("--splice-tail", dest="splice_tail",
                   help="fit.json tail attached beyond the table")
    p.add_argument("--splice-at", dest="splice_at", type=float, default=None)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default="bound.csv")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("fit", help="tail fit on a channel table")
    _add_common(p)
    p.add_argument("--from", dest="table", required=True)
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--form", choices=["subcritical-log", "threshold", "fermion-log"],
                   required=True)
    p.add_argument("--window", type=float, nargs=2, required=True,
                   metavar=("RLO", "RHI"))
    p.add_argument("--ethreshold", type=float, default=None,
                   help="dimer threshold (default: solve two-body)")
    p.add_argument("--out", default="fit.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scan", help="bound-state energies across an alpha2 grid")
    _add_common(p); _add_model(p)
    p.add_argument("--alpha2-grid", dest="alpha2_grid", type=float, nargs=3,
                   default=[-0.05, 0.20, 0.01], metavar=("LO", "HI", "STEP"))
    p.add_argument("--wall", type=float, default=100.0)
    p.add_argument("--nstates", type=int, default=4)
    p.add_argument("--rmax-table", dest="rmax_table", type=float, default=1e6)
    p.add_argument("--per-decade", dest="per_decade", type=int, default=8)
    p.add_argument("--out", default="scan.csv")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("predict", help="recursive subcritical spectrum prediction")
    _add_common(p)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--rmean0", type=float, default=None)
    p.add_argument("--e0", type=float, default=None)
    p.add_argument("--r0", type=float, default=None)
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--from-fit", dest="from_fit", help="take beta from fit.json")
    p.add_argument("--from-bound", dest="from_bound",
                   help="take E0, R_mean0 from bound.csv")
    p.add_argument("--out", default="prediction.json")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("massratio", help="zero-range (2+1) mass-ratio map")
    _add_common(p)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--mass-ratio", dest="mass_ratio", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_massratio)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedSectorError as exc:
        print(f"error (unsupported sector): {exc}", file=sys.stderr)
        return EXIT_SECTOR
    except (ConfigError, FitWindowError, TableRangeError, SingularInputError,
            RadicandError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error (invalid config): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, MeshResolutionError, DomainTooSmallError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConvergenceError):
            diag["diagnostics"] = exc.diagnostics
        out_dir = Path(getattr(args, "out_dir", ".") or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "diagnostics.json", "w") as f:
            json.dump(diag, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        print(f"error (convergence): {exc} [diagnostics.json written]", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
