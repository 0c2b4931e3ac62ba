"""Radial two-body solver: bound-state ladders, mean radii, and thresholds.

The radial equation uses the reduced mass m/2 in the kinetic term while the
pair potential keeps its bare-m normalization:

    -(hbar^2 / m) u'' + [v(r) + l(l+1) hbar^2 / (m r^2)] u = E u.

The pure-potential criticality boundary is therefore alpha2 = l(l+1): at or
below it no bound states exist; above it the regularized potential supports a
geometric ladder with E_{n+1}/E_n -> exp(-2 pi / sqrt(alpha2 - l(l+1))).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainTooSmallError
from .model import HBAR, MASS, CutoffForm, ModelConfig, pair_potential
from .radial import LogGridProblem

#: kinetic coefficient 2*mu_2b/hbar^2 with mu_2b = m/2
TWO_MU_OVER_HBAR2 = MASS / HBAR**2


def radial_effective_potential(r, cfg: ModelConfig, l: int):
    """Pair potential plus centrifugal term l(l+1) hbar^2 / (m r^2)."""
    if l < 0:
        raise ConfigError("l must be a nonnegative integer")
    r = np.asarray(r, dtype=float)
    v = pair_potential(r, cfg)
    if l == 0:
        return v
    return v + l * (l + 1) * HBAR**2 / (MASS * r**2)


def is_subcritical(cfg: ModelConfig, l: int) -> bool:
    """True when the effective coefficient l(l+1) - alpha2 - 1/4 >= -1/4."""
    return cfg.alpha2 <= l * (l + 1)


@dataclass
class TwoBodyLevel:
    v: int
    energy: float
    r_mean: float
    nodes: int


@dataclass
class TwoBodyLevels:
    """Ordered bound levels for one (cfg, l) pair; empty when subcritical."""

    cfg: ModelConfig
    l: int
    levels: list = field(default_factory=list)
    domain: tuple = (0.0, 0.0)
    tol: float = 0.0

    def energies(self):
        return np.array([lv.energy for lv in self.levels])

    def radii(self):
        return np.array([lv.r_mean for lv in self.levels])

    def __len__(self):
        return len(self.levels)

    def to_csv(self, path, manifest_hash: str | None = None):
        with open(path, "w", newline="") as f:
            if manifest_hash:
                f.write(f"# manifest_hash={manifest_hash}\n")
            w = csv.writer(f)
            w.writerow(["v", "l", "E", "r_mean", "nodes"])
            for lv in self.levels:
                w.writerow([lv.v, self.l, repr(lv.energy), repr(lv.r_mean), lv.nodes])

    def sidecar(self) -> dict:
        return {
            "model": self.cfg.to_dict(),
            "l": self.l,
            "tolerance": self.tol,
            "domain": list(self.domain),
            "n_levels": len(self.levels),
        }

    def write_sidecar(self, path, extra: dict | None = None):
        d = self.sidecar()
        if extra:
            d.update(extra)
        with open(path, "w") as f:
            json.dump(d, f, indent=2, sort_keys=True)
            f.write("\n")


def solve_two_body(cfg: ModelConfig, l: int = 0, n_levels: int = 1,
                   domain: tuple | None = None, tol: float = 1e-9,
                   step: float = 0.004) -> TwoBodyLevels:
    """Lowest ``n_levels`` bound states by log-domain node-count shooting.

    Parameters
    ----------
    domain : (r_min, r_max)
        Radial range in units of the base length.  The per-level integration
        reaches 3x each level's outer turning point; a level whose padded
        domain exceeds r_max raises :class:`DomainTooSmallError`.
    """
    if cfg.cutoff is CutoffForm.NONE:
        raise ConfigError("two-body solve requires a regularized cutoff (not 'none')")
    if n_levels < 1:
        raise ConfigError("n_levels must be >= 1")
    if is_subcritical(cfg, l):
        return TwoBodyLevels(cfg, l, [], domain or (0.0, 0.0), tol)
    if domain is None:
        domain = (1e-3 * cfg.r0, 1e10 * cfg.r0)
    r_min, r_max = domain
    if not (0 < r_min < r_max):
        raise ConfigError("domain must satisfy 0 < r_min < r_max")
    x0, x1 = math.log(r_min), math.log(r_max)
    n = int(math.ceil((x1 - x0) / step)) + 1
    x = x0 + step * np.arange(n)
    w = radial_effective_potential(np.exp(x), cfg, l)
    prob = LogGridProblem(x, w, TWO_MU_OVER_HBAR2, start_exponent=l + 0.5)
    res = prob.solve_ladder(n_levels, tol=tol)
    if res.truncated and len(res.levels) < n_levels:
        raise DomainTooSmallError(
            f"only {len(res.levels)} of {n_levels} levels fit below r_max={r_max:g} "
            f"(outer turning point of the next level exceeds the domain)"
        )
    levels = [TwoBodyLevel(lv.n, lv.energy, lv.r_mean, lv.nodes) for lv in res.levels]
    return TwoBodyLevels(cfg, l, levels, domain, tol)


def lowest_threshold(cfg: ModelConfig, l: int = 0, domain: tuple | None = None,
                     tol: float = 1e-9) -> float | None:
    """Deepest dimer energy E_00 for the given l, or None when subcritical."""
    lv = solve_two_body(cfg, l=l, n_levels=1, domain=domain, tol=tol)
    if len(lv) == 0:
        return None
    return lv.levels[0].energy
