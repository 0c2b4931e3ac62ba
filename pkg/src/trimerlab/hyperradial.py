"""Single-channel hyperradial bound-state solver over tens of decades of energy.

Potential sources are either tabulated channels (interpolated, never silently
extrapolated) or analytic model tails; a tabulated source may splice an
analytic tail beyond its validated range.  Threshold-attached ladders are
solved in the frame shifted by the dimer energy, which keeps energies near
the threshold fully resolved.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, RadicandError, TableRangeError
from .hyperangular import TWO_MU3, ChannelTable
from .radial import LogGridProblem

TAIL_FORMS = ("subcritical-log", "pure-inverse-square", "supercritical-threshold",
              "fermion-log")


@dataclass(frozen=True)
class ModelTail:
    """Analytic channel-potential forms.

    - ``subcritical-log``: W = -sqrt(beta ln(R/r0) + delta) hbar^2/(2 mu R^2);
      the radicand is clamped at zero below its validity radius (the form is
      asymptotic; inside that radius it contributes no attraction).
    - ``pure-inverse-square``: W = -coefficient * hbar^2/(2 mu R^2).
    - ``supercritical-threshold``: W = E_th - (alpha_eff2 + 1/4) hbar^2/(2 mu R^2).
    - ``fermion-log``: W = -[(alpha_eff2 + 1/4) + gamma/ln(R/r0)] hbar^2/(2 mu R^2),
      valid for R > r0.
    """

    form: str
    params: dict
    r0: float = 1.0

    def __post_init__(self):
        if self.form not in TAIL_FORMS:
            raise ConfigError(f"unknown tail form {self.form!r}; expected one of {TAIL_FORMS}")

    @property
    def energy_offset(self) -> float:
        """Additive asymptote (nonzero only for threshold-attached forms)."""
        return float(self.params.get("E_th", 0.0)) if self.form == "supercritical-threshold" else 0.0

    def w(self, R):
        """Potential values; shifted forms include their offset."""
        R = np.asarray(R, dtype=float)
        # hbar^2 / (2 mu R^2) in natural units
        inv = 1.0 / (TWO_MU3 * R**2)
        if self.form == "subcritical-log":
            rad = self.params["beta"] * np.log(R / self.r0) + self.params["delta"]
            return -np.sqrt(np.maximum(rad, 0.0)) * inv
        if self.form == "pure-inverse-square":
            return -self.params["coefficient"] * inv
        if self.form == "supercritical-threshold":
            return self.params["E_th"] - (self.params["alpha_eff2"] + 0.25) * inv
        if self.form == "fermion-log":
            t = np.log(R / self.r0)
            if np.any(t <= 0):
                raise RadicandError("fermion-log form is valid only for R > r0")
            return -((self.params["alpha_eff2"] + 0.25) + self.params["gamma"] / t) * inv
        raise ConfigError(self.form)

    def to_dict(self) -> dict:
        return {"form": self.form, "params": dict(self.params), "r0": self.r0}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelTail":
        return cls(form=d["form"], params=dict(d["params"]), r0=float(d.get("r0", 1.0)))

    @classmethod
    def from_fit(cls, fit) -> "ModelTail":
        """Build a tail from a TailFit (object or fit.json dictionary)."""
        if hasattr(fit, "to_dict"):
            fit = fit.to_dict()
        form = fit["form"]
        if form == "threshold":
            form = "supercritical-threshold"
        return cls(form=form, params=dict(fit["params"]), r0=float(fit.get("r0", 1.0)))


class PotentialSource:
    """Channel potential W(R) with optional hard wall and spliced tail.

    Table-backed sources interpolate monotone-cubically in (ln R, ln|W|) on
    the all-negative suffix (preserving the power-law tail) and in
    (ln R, W * 2 mu R^2) through sign changes; evaluation outside the table
    without an attached tail raises :class:`TableRangeError`.
    """

    def __init__(self, wall: float | None = None):
        self.wall = wall
        self.tail: ModelTail | None = None
        self.splice_R: float | None = None
        self._table: ChannelTable | None = None
        self._channel = 0

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_model(cls, tail: ModelTail, wall: float | None = None) -> "PotentialSource":
        src = cls(wall)
        src.tail = tail
        src.splice_R = 0.0
        return src

    @classmethod
    def from_table(cls, table: ChannelTable, channel: int = 0,
                   wall: float | None = None, tail: ModelTail | None = None,
                   splice_R: float | None = None) -> "PotentialSource":
        src = cls(wall)
        src._table = table
        src._channel = channel
        src.tail = tail
        if tail is not None:
            src.splice_R = float(splice_R) if splice_R is not None else float(table.R[-1])
            if src.splice_R > table.R[-1] * (1 + 1e-12):
                raise ConfigError("splice radius beyond the table's validated range")
        src._build_interpolants()
        return src

    def _build_interpolants(self):
        tab, nu = self._table, self._channel
        lnR = np.log(tab.R)
        W = tab.W[nu]
        neg = W < 0
        # maximal all-negative suffix gets the specified log-log transform
        idx = np.nonzero(~neg)[0]
        k = int(idx[-1]) + 1 if idx.size else 0
        self._suffix_start = lnR[k] if k < lnR.size else math.inf
        self._outer = (
            PchipInterpolator(lnR[k:], np.log(-W[k:]), extrapolate=False)
            if lnR.size - k >= 2 else None
        )
        if k > 0:
            ks = min(k + 1, lnR.size)
            u = TWO_MU3 * tab.R[:ks] ** 2 * W[:ks]
            self._inner = PchipInterpolator(lnR[:ks], u, extrapolate=False)
        else:
            self._inner = None

    # -- evaluation ---------------------------------------------------------
    @property
    def r_range(self) -> tuple:
        """Validated (R_lo, R_hi); tails extend R_hi to infinity."""
        lo = 0.0 if self._table is None else float(self._table.R[0])
        if self.tail is not None:
            hi = math.inf
        else:
            hi = math.inf if self._table is None else float(self._table.R[-1])
        if self.wall is not None:
            lo = max(lo, self.wall)
        if self._table is None and self.tail is not None and self.tail.form == "fermion-log":
            lo = max(lo, self.tail.r0 * (1 + 1e-9))
        return lo, hi

    @property
    def energy_offset(self) -> float:
        return self.tail.energy_offset if self.tail is not None else 0.0

    def w(self, R):
        """Absolute potential (offset included)."""
        R = np.asarray(R, dtype=float)
        lo, hi = self.r_range
        if np.any(R < lo * (1 - 1e-12)) or np.any(R > hi * (1 + 1e-12)):
            raise TableRangeError(
                f"evaluation outside the validated range [{lo:g}, {hi:g}] "
                f"(attach a fitted tail instead of extrapolating)"
            )
        if self._table is None:
            return self.tail.w(R)
        out = np.empty_like(R, dtype=float)
        lnR = np.log(R)
        cut = math.log(self.splice_R) if self.splice_R else math.inf
        in_tab = lnR <= cut + 1e-15
        if np.any(in_tab):
            x = lnR[in_tab]
            vals = np.empty_like(x)
            suf = x >= self._suffix_start - 1e-15
            if np.any(suf):
                if self._outer is None:
                    raise TableRangeError("table has no negative-W suffix to interpolate")
                vals[suf] = -np.exp(self._outer(x[suf]))
            if np.any(~suf):
                if self._inner is None:
                    raise TableRangeError("table interpolation failed below the negative suffix")
                vals[~suf] = self._inner(x[~suf]) / (TWO_MU3 * np.exp(x[~suf]) ** 2)
            out[in_tab] = vals
        if np.any(~in_tab):
            out[~in_tab] = self.tail.w(R[~in_tab])
        return out

    def describe(self) -> dict:
        d = {"wall": self.wall}
        if self._table is not None:
            d["table"] = {
                "channel": self._channel,
                "R_range": list(self._table.r_range),
                "content_hash": self._table.content_hash(),
            }
        if self.tail is not None:
            d["tail"] = self.tail.to_dict()
            d["splice_R"] = self.splice_R
        return d


@dataclass
class BoundState:
    n: int
    energy: float          # absolute energy
    energy_rel: float      # energy relative to the source's threshold offset
    r_mean: float
    nodes: int
    r_inner: float
    r_outer: float


@dataclass
class BoundStateSet:
    source: dict
    states: list = field(default_factory=list)
    truncated: bool = False
    energy_offset: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def energies(self):
        return np.array([s.energy for s in self.states])

    def energies_rel(self):
        return np.array([s.energy_rel for s in self.states])

    def radii(self):
        return np.array([s.r_mean for s in self.states])

    def __len__(self):
        return len(self.states)

    def to_csv(self, path, manifest_hash: str | None = None):
        with open(path, "w", newline="") as f:
            if manifest_hash:
                f.write(f"# manifest_hash={manifest_hash}\n")
            w = csv.writer(f)
            w.writerow(["n", "E", "R_mean", "nodes", "Rin", "Rout", "truncated"])
            for s in self.states:
                w.writerow([s.n, repr(s.energy), repr(s.r_mean), s.nodes,
                            repr(s.r_inner), repr(s.r_outer), int(self.truncated)])

    def write_sidecar(self, path, extra: dict | None = None):
        d = {
            "source": self.source,
            "energy_offset": self.energy_offset,
            "truncated": self.truncated,
            "n_states": len(self.states),
            "diagnostics": self.diagnostics,
        }
        if extra:
            d.update(extra)
        with open(path, "w") as f:
            json.dump(d, f, indent=2, sort_keys=True)
            f.write("\n")


def solve_bound_states(src: PotentialSource, n_max: int, tol: float = 1e-8,
                       step: float = 0.004, r_cap: float = 1e60,
                       pad: float = 3.0) -> BoundStateSet:
    """Bound states of -(hbar^2/2 mu) F'' + W F = E F below the source threshold.

    Works in x = ln R with per-level node-count bracketing; the integration
    domain of each level reaches ``pad`` times its outer turning point
    (default 3x).  When the next level's padded domain exceeds the
    representable range the search stops and the result carries a truncation
    flag.
    """
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    lo, hi = src.r_range
    if src.wall is not None and lo < src.wall:
        lo = src.wall
    if not (lo > 0):
        raise ConfigError("source needs a positive inner radius (wall or table edge)")
    x0 = math.log(lo)
    x1 = math.log(min(hi, r_cap))
    if x1 - x0 < 1.0:
        raise ConfigError("usable radial range is too narrow")
    n = max(int(math.ceil((x1 - x0) / step)) + 1, 16)
    x = np.linspace(x0, x1, n)
    offset = src.energy_offset
    w = src.w(np.exp(x)) - offset
    # Dirichlet inner boundary: exact at a hard wall, and an exponentially
    # small perturbation at a table edge lying in the forbidden region
    prob = LogGridProblem(x, w, TWO_MU3, start_exponent=None)
    res = prob.solve_ladder(n_max, tol=tol, pad=pad,
                            require_inner_forbidden=(src.wall is None and src._table is not None))
    states = [
        BoundState(lv.n, lv.energy + offset, lv.energy, lv.r_mean, lv.nodes,
                   lv.r_inner, lv.r_outer)
        for lv in res.levels
    ]
    return BoundStateSet(src.describe(), states, res.truncated, offset, res.diagnostics)


def dense_oracle_energies(src: PotentialSource, n_levels: int,
                          step: float = 1e-3, r_cap: float = None) -> np.ndarray:
    """Independent cross-check: dense-grid diagonalization on narrow sources."""
    from .radial import dense_log_grid_energies

    lo, hi = src.r_range
    if src.wall is not None:
        lo = max(lo, src.wall)
    hi = min(hi, r_cap if r_cap is not None else hi)
    if not np.isfinite(hi):
        raise ConfigError("dense oracle needs a finite upper radius (pass r_cap)")
    x = np.arange(math.log(lo), math.log(hi), step)
    w = src.w(np.exp(x)) - src.energy_offset
    return dense_log_grid_energies(x, w, TWO_MU3, n_levels) + src.energy_offset


@dataclass
class ScanPoint:
    alpha2: float
    energies: np.ndarray          # absolute energies of the found states
    energies_rel: np.ndarray      # relative to the dimer threshold (if any)
    threshold: float | None       # E_00 from the two-body solver (alpha2 > 0)
    w_end: float                  # channel potential at the table edge
    tail: dict | None
    truncated: bool
    error: str | None = None


@dataclass
class ScanResult:
    wall: float
    n_states: int
    points: list = field(default_factory=list)

    def to_csv(self, path, manifest_hash: str | None = None):
        with open(path, "w", newline="") as f:
            if manifest_hash:
                f.write(f"# manifest_hash={manifest_hash}\n")
            w = csv.writer(f)
            w.writerow(["alpha2", "n", "E", "E_rel", "threshold", "truncated", "error"])
            for p in self.points:
                if p.error and p.energies.size == 0:
                    w.writerow([repr(p.alpha2), "", "", "",
                                repr(p.threshold) if p.threshold is not None else "",
                                int(p.truncated), p.error])
                    continue
                for i, e in enumerate(p.energies):
                    w.writerow([repr(p.alpha2), i, repr(float(e)),
                                repr(float(p.energies_rel[i])),
                                repr(p.threshold) if p.threshold is not None else "",
                                int(p.truncated), p.error or ""])

    def write_sidecar(self, path, extra: dict | None = None):
        d = {
            "wall": self.wall,
            "n_states": self.n_states,
            "points": [
                {
                    "alpha2": p.alpha2,
                    "threshold": p.threshold,
                    "tail": p.tail,
                    "truncated": p.truncated,
                    "error": p.error,
                    "n_found": int(p.energies.size),
                }
                for p in self.points
            ],
        }
        if extra:
            d.update(extra)
        with open(path, "w") as f:
            json.dump(d, f, indent=2, sort_keys=True)
            f.write("\n")


def _scan_tail_for(cfg, table, channel=0):
    """Spliced tail pieces for a scan point.

    The fitted subcritical-log form covers hyperradii far below the dimer
    size, where the channel still looks subcritical; for alpha2 > 0 the
    threshold form E_00 - (alpha_eff^2 + 1/4)/(2 mu R^2) takes over beyond
    the dimer size, with the closed-form alpha_eff^2 = (8/3) alpha2 + 5/12
    and E_00 from the two-body solver.
    """
    from .analysis import alpha_eff_squared, fit_subcritical_tail
    from .errors import DomainTooSmallError
    from .twobody import lowest_threshold

    W = table.W[channel]
    R = table.R
    log_tail = None
    neg = W < 0
    idx = np.nonzero(~neg)[0]
    k = int(idx[-1]) + 1 if idx.size else 0
    if k > 0 and R.size - k >= 5:
        # genuinely subcritical-looking channel (repulsive inner region)
        lo = min(2.0 * R[k], R[-1] / 10.0)
        try:
            fit = fit_subcritical_tail(R, W, (lo, R[-1]), cfg.r0)
            if fit.params["beta"] > 0:
                log_tail = ModelTail("subcritical-log", dict(fit.params), cfg.r0)
        except Exception:
            log_tail = None
    threshold = None
    thr_tail = None
    if cfg.alpha2 > 0:
        try:
            threshold = lowest_threshold(cfg, l=0, domain=(1e-4 * cfg.r0, 1e30 * cfg.r0))
        except DomainTooSmallError:
            threshold = None  # dimer too weakly bound to matter at this scale
        if threshold is not None:
            thr_tail = ModelTail(
                "supercritical-threshold",
                {"E_th": threshold, "alpha_eff2": alpha_eff_squared(cfg.alpha2, 0)},
                cfg.r0,
            )
    return log_tail, thr_tail, threshold


class _CrossoverTail(ModelTail):
    """Log-form tail below the dimer size, threshold form beyond it."""

    def __init__(self, log_tail: ModelTail, thr_tail: ModelTail, r_cross: float):
        object.__setattr__(self, "form", "supercritical-threshold")
        object.__setattr__(self, "params", dict(thr_tail.params))
        object.__setattr__(self, "r0", thr_tail.r0)
        object.__setattr__(self, "_log", log_tail)
        object.__setattr__(self, "_thr", thr_tail)
        object.__setattr__(self, "r_cross", float(r_cross))

    def w(self, R):
        R = np.asarray(R, dtype=float)
        return np.where(R < self.r_cross, self._log.w(R), self._thr.w(R))

    def to_dict(self):
        return {
            "form": "log-threshold-crossover",
            "r_cross": self.r_cross,
            "log": self._log.to_dict(),
            "threshold": self._thr.to_dict(),
        }


def scan_point(cfg, wall: float, n_states: int, r_table_max: float = 1e6,
               per_decade: int = 8, tol: float = 1e-8) -> ScanPoint:
    """One alpha2 sample of the spectrum scan (table, tail, bound states)."""
    from .hyperangular import channel_table

    n_pts = max(int(round(per_decade * math.log10(r_table_max / 10.0))) + 1, 10)
    grid = np.geomspace(10.0 * cfg.r0, r_table_max * cfg.r0, n_pts)
    table = channel_table(cfg, grid, n_channels=1)
    log_tail, thr_tail, threshold = _scan_tail_for(cfg, table)
    splice_R = None
    if thr_tail is not None:
        # dimer size: beyond it the threshold form is the right physics
        r_dimer = 3.0 / math.sqrt(abs(threshold))
        if log_tail is not None and r_dimer > table.R[-1]:
            tail = _CrossoverTail(log_tail, thr_tail, r_dimer)
        else:
            tail = thr_tail
            # splice early: beyond this radius the tabulated W - E_00 is
            # dominated by solver noise (numerical cancellation)
            a_eff2 = thr_tail.params["alpha_eff2"]
            r_noise = math.sqrt((a_eff2 + 0.25)
                                / (TWO_MU3 * max(abs(threshold) * 1e-5, 1e-280)))
            splice_R = float(np.clip(r_noise, 3.0 * wall, table.R[-1]))
    else:
        tail = log_tail
    src = PotentialSource.from_table(table, 0, wall=wall, tail=tail,
                                     splice_R=splice_R if tail is not None else None)
    res = solve_bound_states(src, n_states, tol=tol, r_cap=1e130)
    return ScanPoint(
        alpha2=cfg.alpha2,
        energies=res.energies(),
        energies_rel=res.energies() - (threshold or 0.0),
        threshold=threshold,
        w_end=float(table.W[0][-1]),
        tail=tail.to_dict() if tail is not None else None,
        truncated=res.truncated,
    )


def spectrum_scan(cfg_template, alpha2_list, wall: float, n_states: int,
                  r_table_max: float = 1e6, per_decade: int = 8,
                  workers: int = 1) -> ScanResult:
    """Lowest n_states three-body energies per alpha2, channels from the
    adiabatic tables, with per-alpha2 failures recorded and the scan continued.
    """
    alpha2_list = list(alpha2_list)
    if any(b <= a for a, b in zip(alpha2_list, alpha2_list[1:])):
        raise ConfigError("alpha2 list must be strictly ascending")
    cfgs = [cfg_template.with_(alpha2=float(a)) for a in alpha2_list]
    out = ScanResult(wall, n_states)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_scan_point_safe, c, wall, n_states, r_table_max,
                              per_decade) for c in cfgs]
            out.points = [f.result() for f in futs]
    else:
        out.points = [_scan_point_safe(c, wall, n_states, r_table_max, per_decade)
                      for c in cfgs]
    return out


def _scan_point_safe(cfg, wall, n_states, r_table_max, per_decade) -> ScanPoint:
    try:
        return scan_point(cfg, wall, n_states, r_table_max, per_decade)
    except Exception as exc:  # per-point failures must not kill the scan
        return ScanPoint(cfg.alpha2, np.array([]), np.array([]), None,
                         float("nan"), None, False, error=f"{type(exc).__name__}: {exc}")
