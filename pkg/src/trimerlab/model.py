"""Units, pair potentials, symmetry sectors, and democratic hyperangular coordinates.

Natural units throughout: ``hbar = 1``, particle mass ``m = 1``, and the base
length unit is the regularization scale ``r0`` by default.  All energies are
reported in ``hbar^2 / (m * length^2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, SingularInputError

HBAR = 1.0
MASS = 1.0

#: Three-body hyperradial reduced mass for identical particles, m / sqrt(3).
MU3 = MASS / math.sqrt(3.0)

#: Two-body reduced mass for identical particles, m / 2 (kinetic term only;
#: the pair potential keeps its bare-m normalization).
MU2 = MASS / 2.0


class CutoffForm(str, Enum):
    """Short-range regularization of the attractive inverse-square pair potential.

    The denominator of the pair potential is ``D(r)``:

    - ``SECH2``:    D = r0^2 sech^2(r/r0) + r^2
    - ``GAUSSIAN``: D = r0^2 exp(-(r/r0)^2) + r^2
    - ``CONSTANT``: D = r0^2 + r^2
    - ``NONE``:     D = r^2  (pure inverse square, singular at r = 0)
    """

    SECH2 = "sech2"
    GAUSSIAN = "gaussian"
    CONSTANT = "constant"
    NONE = "none"


@dataclass(frozen=True)
class SymmetrySector:
    """Exchange statistics and total angular quantum numbers.

    The hyperangular solver supports exactly (boson, J=0, parity=+1).  The
    fermionic (fermion, J=1, parity=+1) sector is accepted by analysis-only
    operations and rejected by the solver with a distinct error.
    """

    statistics: str = "boson"
    J: int = 0
    parity: int = 1

    def __post_init__(self):
        if self.statistics not in ("boson", "fermion"):
            raise ConfigError(f"unknown statistics {self.statistics!r}")
        if not (isinstance(self.J, int) and self.J >= 0):
            raise ConfigError("J must be a nonnegative integer")
        if self.parity not in (1, -1):
            raise ConfigError("parity must be +1 or -1")

    @property
    def is_bosonic_ground_sector(self) -> bool:
        return self.statistics == "boson" and self.J == 0 and self.parity == 1

    def to_dict(self) -> dict:
        return {"statistics": self.statistics, "J": self.J, "parity": self.parity}

    @classmethod
    def from_dict(cls, d: dict) -> "SymmetrySector":
        return cls(statistics=d["statistics"], J=int(d["J"]), parity=int(d["parity"]))


BOSON_0P = SymmetrySector("boson", 0, 1)
FERMION_1P = SymmetrySector("fermion", 1, 1)


@dataclass(frozen=True)
class ModelConfig:
    """Single source of physical truth for a run.

    Parameters
    ----------
    alpha2 : float
        Dimensionless pair strength; the pair potential carries the
        coefficient ``alpha2 + 1/4``.  Range ``[-1/4, inf)``; the boundary
        value ``-1/4`` switches the interaction off and serves as the
        free-particle regression anchor.
    r0 : float
        Regularization length (also the default base length unit).
    cutoff : CutoffForm
        Short-range cutoff variant.
    sector : SymmetrySector
        Exchange/angular-momentum sector.
    """

    alpha2: float
    r0: float = 1.0
    cutoff: CutoffForm = CutoffForm.SECH2
    sector: SymmetrySector = field(default_factory=lambda: BOSON_0P)

    def __post_init__(self):
        if not math.isfinite(self.alpha2) or self.alpha2 < -0.25:
            raise ConfigError(
                f"alpha2 must be >= -1/4 (coefficient alpha2 + 1/4 >= 0), got {self.alpha2}"
            )
        if self.cutoff is not CutoffForm.NONE and not (
            math.isfinite(self.r0) and self.r0 > 0
        ):
            raise ConfigError(f"r0 must be positive for cutoff {self.cutoff.value}, got {self.r0}")

    @property
    def strength(self) -> float:
        """Coefficient ``alpha2 + 1/4`` multiplying the attractive core."""
        return self.alpha2 + 0.25

    def with_(self, **kwargs) -> "ModelConfig":
        d = {
            "alpha2": self.alpha2,
            "r0": self.r0,
            "cutoff": self.cutoff,
            "sector": self.sector,
        }
        d.update(kwargs)
        return ModelConfig(**d)

    def to_dict(self) -> dict:
        return {
            "alpha2": self.alpha2,
            "r0": self.r0,
            "cutoff": self.cutoff.value,
            "sector": self.sector.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        try:
            cutoff = CutoffForm(d.get("cutoff", "sech2"))
        except ValueError as exc:
            raise ConfigError(f"unknown cutoff {d.get('cutoff')!r}") from exc
        sector = d.get("sector")
        sec = SymmetrySector.from_dict(sector) if sector else BOSON_0P
        return cls(alpha2=float(d["alpha2"]), r0=float(d.get("r0", 1.0)), cutoff=cutoff, sector=sec)

    @classmethod
    def from_json(cls, s: str) -> "ModelConfig":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class HyperangularPoint:
    """A point (R, theta, phi) in democratic hyperangular coordinates.

    theta in [0, pi/2]; phi in [0, 2*pi).  The bosonic 0+ sector reduces to
    phi in [0, pi/3].  The two-body coincidences sit at theta = pi/2 with
    phi = pi + 2*pi*k/3 (mod 2*pi).
    """

    R: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.R < 0:
            raise ConfigError("hyperradius must be nonnegative")
        if not 0.0 <= self.theta <= math.pi / 2 + 1e-12:
            raise ConfigError("theta must lie in [0, pi/2]")


def _sech2(x):
    # 4 e^{-2|x|} / (1 + e^{-2|x|})^2 avoids cosh overflow for large |x|.
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def cutoff_denominator(r, r0: float, cutoff: CutoffForm):
    """Denominator D(r) of the pair potential for the given cutoff form."""
    r = np.asarray(r, dtype=float)
    if cutoff is CutoffForm.NONE:
        return r**2
    if cutoff is CutoffForm.SECH2:
        return r0**2 * _sech2(r / r0) + r**2
    if cutoff is CutoffForm.GAUSSIAN:
        return r0**2 * np.exp(-((r / r0) ** 2)) + r**2
    if cutoff is CutoffForm.CONSTANT:
        return r0**2 + r**2
    raise ConfigError(f"unhandled cutoff {cutoff}")


def pair_potential(r, cfg: ModelConfig):
    """Two-body potential ``-(alpha2 + 1/4) hbar^2 / (m D(r))``.

    Accepts scalars or arrays.  For the pure form (cutoff NONE) evaluation at
    r = 0 raises :class:`SingularInputError`.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ConfigError("pair distance must be nonnegative")
    if cfg.cutoff is CutoffForm.NONE and np.any(r == 0):
        raise SingularInputError("pure inverse-square potential is singular at r = 0")
    out = -cfg.strength * HBAR**2 / (MASS * cutoff_denominator(r, cfg.r0, cfg.cutoff))
    return out if out.shape else float(out)


def pair_distances(p: HyperangularPoint):
    """The three pair distances at a hyperangular point.

    r_k = 3^(-1/4) R sqrt(1 + sin(theta) cos(phi - 2 pi k / 3)), k = 0, 1, 2.
    They satisfy the sum rule r_0^2 + r_1^2 + r_2^2 = sqrt(3) R^2.
    """
    k = np.arange(3)
    radicand = 1.0 + math.sin(p.theta) * np.cos(p.phi - 2.0 * math.pi * k / 3.0)
    radicand = np.maximum(radicand, 0.0)
    r = 3.0 ** (-0.25) * p.R * np.sqrt(radicand)
    return float(r[0]), float(r[1]), float(r[2])


def pair_distances_grid(R, theta, phi):
    """Vectorized pair distances on broadcastable theta/phi arrays.

    Returns an array of shape (3,) + broadcast(theta, phi).shape.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s = np.sin(theta)
    out = []
    for k in range(3):
        radicand = 1.0 + s * np.cos(phi - 2.0 * math.pi * k / 3.0)
        out.append(3.0 ** (-0.25) * R * np.sqrt(np.maximum(radicand, 0.0)))
    return np.stack(out)


def total_potential(p: HyperangularPoint, cfg: ModelConfig) -> float:
    """Pairwise sum of two-body potentials at a hyperangular point."""
    r = pair_distances(p)
    return float(sum(pair_potential(rk, cfg) for rk in r))


def total_potential_grid(R, theta, phi, cfg: ModelConfig):
    """Vectorized pairwise-sum potential on a (theta, phi) grid."""
    rk = pair_distances_grid(R, theta, phi)
    if cfg.cutoff is CutoffForm.NONE and np.any(rk == 0):
        raise SingularInputError("pure inverse-square potential is singular at a pair coincidence")
    return sum(pair_potential(rk[k], cfg) for k in range(3))
