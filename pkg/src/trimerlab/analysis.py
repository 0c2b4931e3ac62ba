"""Fits and closed-form analysis: asymptotic tails, parameter trends,
spectrum-law predictions, geometric ratios, and the fermionic mass-ratio map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, FitWindowError, RadicandError
from .hyperangular import TWO_MU3
from .model import ModelConfig


# ---------------------------------------------------------------------------
# fit containers
# ---------------------------------------------------------------------------

@dataclass
class TailFit:
    """Fitted asymptotic-form parameters with window and residual diagnostics."""

    form: str
    params: dict
    window: tuple
    residual_norm: float
    covariance: list
    r_squared: float
    n_points: int
    source_hash: str = ""
    r0: float = 1.0

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "params": {k: float(v) for k, v in self.params.items()},
            "window": [float(self.window[0]), float(self.window[1])],
            "residual_norm": float(self.residual_norm),
            "covariance": [[float(x) for x in row] for row in self.covariance],
            "r_squared": float(self.r_squared),
            "n_points": int(self.n_points),
            "source_hash": self.source_hash,
            "r0": float(self.r0),
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "TailFit":
        with open(path) as f:
            d = json.load(f)
        return cls(d["form"], d["params"], tuple(d["window"]), d["residual_norm"],
                   d["covariance"], d["r_squared"], d["n_points"],
                   d.get("source_hash", ""), d.get("r0", 1.0))

    def std_errors(self) -> dict:
        keys = list(self.params.keys())
        cov = np.asarray(self.covariance)
        return {k: math.sqrt(max(cov[i, i], 0.0)) for i, k in enumerate(keys)}


def _window_mask(R, window):
    R = np.asarray(R, dtype=float)
    lo, hi = window
    if not (0 < lo < hi):
        raise FitWindowError("window must satisfy 0 < lo < hi")
    m = (R >= lo * (1 - 1e-12)) & (R <= hi * (1 + 1e-12))
    if m.sum() < 4:
        raise FitWindowError(f"window [{lo:g}, {hi:g}] holds only {int(m.sum())} samples")
    if R[m].max() / R[m].min() < 10.0:
        raise FitWindowError("window spans less than one decade; fit is ill-conditioned")
    return m


def _gauss_newton(residual_jac, p0, max_iter=60, tol=1e-14):
    """Damped Gauss-Newton with step halving; returns (p, cov, rss)."""
    p = np.asarray(p0, dtype=float)
    out = residual_jac(p)
    if out is None:
        raise RadicandError("initial fit parameters violate the model's domain")
    r, J = out
    rss = float(r @ r)
    for _ in range(max_iter):
        g = J.T @ r
        H = J.T @ J
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        lam = 1.0
        for _ in range(30):
            trial = p - lam * step
            out = residual_jac(trial)
            if out is not None:
                r_t, J_t = out
                rss_t = float(r_t @ r_t)
                if rss_t <= rss * (1 + 1e-15):
                    break
            lam *= 0.5
        else:
            break
        moved = np.max(np.abs(lam * step) / np.maximum(np.abs(p), 1e-30))
        p, r, J, rss = trial, r_t, J_t, rss_t
        if moved < tol:
            break
    dof = max(r.size - p.size, 1)
    sigma2 = rss / dof
    try:
        cov = sigma2 * np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError:
        cov = np.full((p.size, p.size), np.nan)
    return p, cov, rss


# ---------------------------------------------------------------------------
# tail fits
# ---------------------------------------------------------------------------

def fit_subcritical_tail(R, W, window, r0: float = 1.0,
                         source_hash: str = "") -> TailFit:
    """Fit W = -sqrt(beta ln(R/r0) + delta) hbar^2/(2 mu R^2) on the window.

    The linearized regression of (2 mu R^2 |W|)^2 against ln(R/r0) seeds a
    damped Gauss-Newton refinement in the square-root form.  All W in the
    window must be negative (positive radicand).
    """
    R = np.asarray(R, dtype=float)
    W = np.asarray(W, dtype=float)
    m = _window_mask(R, window)
    if np.any(W[m] >= 0):
        raise FitWindowError(
            "nonpositive radicand: W must be negative across the fit window"
        )
    t = np.log(R[m] / r0)
    wt = -W[m] * TWO_MU3 * R[m] ** 2
    y = wt**2
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    yhat = A @ coef
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    # lift the seed intercept if the linearized line dips nonpositive in-window
    rad0 = coef[0] * t + coef[1]
    if np.any(rad0 <= 0):
        coef[1] += float(np.min(y) / 2.0 - np.min(rad0))

    def residual_jac(p):
        beta, delta = p
        rad = beta * t + delta
        if np.any(rad <= 0):
            return None
        s = np.sqrt(rad)
        r = s - wt
        J = np.column_stack([t / (2 * s), 1.0 / (2 * s)])
        return r, J

    p, cov, rss = _gauss_newton(residual_jac, coef)
    return TailFit("subcritical-log", {"beta": float(p[0]), "delta": float(p[1])},
                   window, math.sqrt(rss), cov.tolist(), r_squared, int(m.sum()),
                   source_hash, r0)


def fit_threshold_tail(R, W, e_th: float | None, window,
                       source_hash: str = "") -> TailFit:
    """Fit (E_th - W) 2 mu R^2 / hbar^2 - 1/4 -> alpha_eff^2 over the window.

    A first-order 1/R nuisance term absorbs the leading pre-asymptotic
    correction; on exact threshold-form data it vanishes and the recovery is
    exact.  Windows overlapping the channel minimum are rejected.
    """
    if e_th is None:
        raise FitWindowError("threshold energy absent (no bound dimer for this config)")
    R = np.asarray(R, dtype=float)
    W = np.asarray(W, dtype=float)
    m = _window_mask(R, window)
    i_min = int(np.argmin(W))
    if window[0] <= R[i_min]:
        raise FitWindowError(
            f"window overlaps the potential minimum at R = {R[i_min]:g}; "
            "the threshold form is asymptotic only"
        )
    tvals = (e_th - W[m]) * TWO_MU3 * R[m] ** 2 - 0.25
    A = np.vstack([np.ones_like(R[m]), 1.0 / R[m]]).T
    coef, *_ = np.linalg.lstsq(A, tvals, rcond=None)
    resid = tvals - A @ coef
    ss_tot = float(np.sum((tvals - tvals.mean()) ** 2))
    r_squared = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    dof = max(m.sum() - 2, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return TailFit("supercritical-threshold",
                   {"E_th": float(e_th), "alpha_eff2": float(coef[0])},
                   window, float(np.linalg.norm(resid)),
                   cov.tolist(), r_squared, int(m.sum()), source_hash)


def fit_fermion_tail(R, W, window, r0: float = 1.0,
                     source_hash: str = "") -> TailFit:
    """Fit W = -[(alpha_eff^2 + 1/4) + gamma / ln(R/r0)] hbar^2/(2 mu R^2)."""
    R = np.asarray(R, dtype=float)
    W = np.asarray(W, dtype=float)
    m = _window_mask(R, window)
    if np.any(W[m] >= 0):
        raise FitWindowError("W must be negative across the fermionic fit window")
    t = np.log(R[m] / r0)
    if np.any(t <= 0):
        raise FitWindowError("fermionic form needs R > r0 in the window")
    wt = -W[m] * TWO_MU3 * R[m] ** 2
    A = np.vstack([np.ones_like(t), 1.0 / t]).T
    coef, *_ = np.linalg.lstsq(A, wt, rcond=None)
    resid = wt - A @ coef
    ss_tot = float(np.sum((wt - wt.mean()) ** 2))
    r_squared = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    dof = max(m.sum() - 2, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return TailFit("fermion-log",
                   {"alpha_eff2": float(coef[0] - 0.25), "gamma": float(coef[1])},
                   window, float(np.linalg.norm(resid)), cov.tolist(),
                   r_squared, int(m.sum()), source_hash, r0)


# ---------------------------------------------------------------------------
# parameter trends and the critical strength
# ---------------------------------------------------------------------------

@dataclass
class TrendFit:
    """Exponential trends beta(alpha2), -delta(alpha2) and the derived alpha_c^2."""

    beta_fit: dict
    delta_fit: dict
    alpha_c2: float | None
    points: list
    beta_cov: list = field(default_factory=list)
    delta_cov: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "beta_fit": self.beta_fit,
            "delta_fit": self.delta_fit,
            "alpha_c2": self.alpha_c2,
            "points": self.points,
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def beta_at(self, alpha2):
        a, b, c = (self.beta_fit[k] for k in ("a", "b", "c"))
        return a * np.exp(b * np.asarray(alpha2)) + c


def _fit_exponential_trend(x, y):
    """Three-parameter fit y = a exp(b x) + c via difference-ratio seeding."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 4:
        raise FitWindowError("trend fit needs at least 4 points")
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    # seed b from successive difference ratios (exact on a uniform grid)
    d = np.diff(ys)
    dx = np.diff(xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = d[1:] / d[:-1]
    good = np.isfinite(ratios) & (ratios > 0)
    if np.any(good):
        b0 = float(np.median(np.log(ratios[good]) / dx[1:][good]))
    else:
        b0 = 1.0 / max(np.ptp(xs), 1e-6)
    b0 = float(np.clip(b0, -1e4, 1e4))

    def linear_part(b):
        e = np.exp(b * xs)
        A = np.vstack([e, np.ones_like(e)]).T
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        return coef, e

    (a0, c0), _ = linear_part(b0)

    def residual_jac(p):
        a, b, c = p
        if abs(b) > 1e6:
            return None
        e = np.exp(np.clip(b * xs, -700, 700))
        r = a * e + c - ys
        J = np.column_stack([e, a * xs * e, np.ones_like(e)])
        return r, J

    p, cov, rss = _gauss_newton(residual_jac, [a0, b0, c0])
    return {"a": float(p[0]), "b": float(p[1]), "c": float(p[2])}, cov.tolist(), rss


def fit_parameter_trends(points) -> TrendFit:
    """Fit beta = a exp(b alpha2) + c and -delta likewise; root the beta trend.

    points : iterable of (alpha2, beta, delta).
    alpha_c^2 = ln(-c/a)/b requires a > 0 and c < 0; otherwise the critical
    strength is reported as undefined (None).
    """
    pts = [(float(a), float(b), float(d)) for a, b, d in points]
    if len(pts) < 4:
        raise FitWindowError("trend fit needs at least 4 (alpha2, beta, delta) points")
    x = np.array([p[0] for p in pts])
    beta = np.array([p[1] for p in pts])
    mdelta = np.array([-p[2] for p in pts])
    beta_fit, beta_cov, _ = _fit_exponential_trend(x, beta)
    delta_fit, delta_cov, _ = _fit_exponential_trend(x, mdelta)
    a, b, c = beta_fit["a"], beta_fit["b"], beta_fit["c"]
    alpha_c2 = None
    if a > 0 and c < 0 and b != 0:
        alpha_c2 = math.log(-c / a) / b
    return TrendFit(beta_fit, delta_fit, alpha_c2,
                    [list(p) for p in pts], beta_cov, delta_cov)


# ---------------------------------------------------------------------------
# spectrum recursion
# ---------------------------------------------------------------------------

@dataclass
class SpectrumPrediction:
    beta: float
    r_mean0: float
    e0: float
    energies: list
    ratios: list
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "r_mean0": self.r_mean0,
            "e0": self.e0,
            "energies": self.energies,
            "ratios": self.ratios,
            "truncated": self.truncated,
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def predict_spectrum(beta: float, r_mean0: float, e0: float, n_max: int,
                     r0: float = 1.0) -> SpectrumPrediction:
    """Iterate the delta-free recursion for the subcritical ladder.

    E_{n+1} = E_n exp(-2 pi / [ (beta ln(<R>_0/r0) - (beta/2) ln(E_n/E_0))^{1/2}
    - 1/4 ]^{1/2}), starting from the numerically computed ground state.
    """
    if e0 >= 0:
        raise ConfigError("ground energy must be negative")
    t0 = beta * math.log(r_mean0 / r0)
    if t0 <= 1.0 / 16.0:
        raise RadicandError(
            f"beta ln(R0/r0) = {t0:.4g} <= 1/16; the recursion radicand is not positive"
        )
    energies = [float(e0)]
    ratios = []
    truncated = False
    for _ in range(n_max):
        x = t0 - 0.5 * beta * math.log(energies[-1] / e0)
        inner = math.sqrt(x) - 0.25
        if inner <= 0:
            truncated = True
            break
        ratio = math.exp(-2.0 * math.pi / math.sqrt(inner))
        ratios.append(ratio)
        energies.append(energies[-1] * ratio)
    return SpectrumPrediction(beta, r_mean0, e0, energies, ratios, truncated)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def alpha_eff_squared(alpha2: float, l: int) -> float:
    """Supercritical channel strength (8/3) alpha2 + 5/12 - l(l+1)."""
    if not (isinstance(l, (int, np.integer)) and l >= 0):
        raise ConfigError("l must be a nonnegative integer")
    return (8.0 / 3.0) * alpha2 + 5.0 / 12.0 - l * (l + 1)


def alpha_d_squared(l: int) -> float:
    """Critical pair strength for deep-dimer channels: 3 l(l+1)/8 - 5/32."""
    if not (isinstance(l, (int, np.integer)) and l >= 0):
        raise ConfigError("l must be a nonnegative integer")
    return 3.0 * l * (l + 1) / 8.0 - 5.0 / 32.0


def geometric_ratios(alpha_eff: float) -> tuple:
    """(energy ratio, radius ratio) = (exp(-2 pi/alpha_eff), exp(pi/alpha_eff))."""
    if not alpha_eff > 0:
        raise ConfigError("alpha_eff must be positive")
    return math.exp(-2.0 * math.pi / alpha_eff), math.exp(math.pi / alpha_eff)


# ---------------------------------------------------------------------------
# zero-range (2+1) mass-ratio map
# ---------------------------------------------------------------------------

def _exponent_determinant(nu: float, gamma_angle: float) -> float:
    """Matching determinant for the heavy-heavy-light zero-range problem.

    The l = 1 hyperangular Faddeev component with a unitary heavy-light pair
    satisfies f''(a) + (nu^2 - 2/cos^2 a) f = 0 with
    f_nu(a) = nu cos(nu(pi/2 - a)) - tan(a) sin(nu(pi/2 - a)); the contact
    condition at the pair coincidence couples it to the exchanged component at
    the kinematic angle gamma, giving
    (nu^2 - 1) sin(nu pi/2) + (2/sin 2 gamma) f_nu(gamma) = 0.
    nu = 0 and nu = 1 are removable roots of this raw form.
    """
    half = math.pi / 2.0
    f_g = nu * math.cos(nu * (half - gamma_angle)) - math.tan(gamma_angle) * math.sin(
        nu * (half - gamma_angle)
    )
    return (nu**2 - 1.0) * math.sin(nu * half) + (2.0 / math.sin(2.0 * gamma_angle)) * f_g


def _deflated_determinant(nu: float, gamma_angle: float) -> float:
    return _exponent_determinant(nu, gamma_angle) / (nu * (1.0 - nu * nu))


def _kinematic_angle(mass_ratio: float) -> float:
    # tan(gamma) = sqrt(2 lambda + 1) / lambda for two heavies of mass
    # lambda * m_L sharing the light particle
    return math.atan(math.sqrt(2.0 * mass_ratio + 1.0) / mass_ratio)


#: mass ratio at which the l = 1 exponent reaches zero (supercriticality onset)
CRITICAL_MASS_RATIO = None


def _critical_mass_ratio() -> float:
    global CRITICAL_MASS_RATIO
    if CRITICAL_MASS_RATIO is None:
        def g(lam):
            gam = _kinematic_angle(lam)
            # nu -> 0 limit of the deflated determinant
            return (-math.pi / 2.0 + (2.0 / math.sin(2.0 * gam))
                    * (1.0 - (math.pi / 2.0 - gam) * math.tan(gam)))
        CRITICAL_MASS_RATIO = brentq(g, 8.0, 20.0, xtol=1e-12)
    return CRITICAL_MASS_RATIO


def s1_squared(mass_ratio: float) -> float:
    """Squared l = 1 channel exponent of the unitary (2+1) fermionic problem.

    Positive below the critical mass ratio (~13.607) and zero at it; the
    associated heavy-heavy channel potential is
    (s1^2 - 1/4) hbar^2 / (2 mu rho^2).
    """
    if mass_ratio <= 0:
        raise ConfigError("mass ratio must be positive")
    lam_c = _critical_mass_ratio()
    if mass_ratio >= lam_c:
        return 0.0 if abs(mass_ratio - lam_c) < 1e-9 else -_imaginary_s1_squared(mass_ratio)
    gam = _kinematic_angle(mass_ratio)
    grid = np.linspace(1e-6, 1.999, 600)
    vals = np.array([_deflated_determinant(float(v), gam) for v in grid])
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    # skip the removable root at nu = 1
    for i in sign_change:
        if abs(grid[i] - 1.0) < 2e-3 and abs(grid[i + 1] - 1.0) < 2e-3:
            continue
        root = brentq(_deflated_determinant, grid[i], grid[i + 1], args=(gam,),
                      xtol=1e-13)
        if abs(root - 1.0) > 1e-6:
            return root**2
    raise ConfigError(f"no real channel exponent found for mass ratio {mass_ratio}")


def _imaginary_s1_squared(mass_ratio: float) -> float:
    """|s1|^2 for supercritical mass ratios (exponent nu = i s)."""
    gam = _kinematic_angle(mass_ratio)
    half = math.pi / 2.0

    def det_imag(s):
        # analytic continuation nu -> i s of the deflated determinant
        f_g = s * math.cosh(s * (half - gam)) - math.tan(gam) * math.sinh(s * (half - gam))
        raw = (s * s + 1.0) * math.sinh(s * half) - (2.0 / math.sin(2.0 * gam)) * f_g
        return raw / (s * (1.0 + s * s))

    lo, hi = 1e-8, 5.0
    return brentq(det_imag, lo, hi, xtol=1e-13) ** 2


def mass_ratio_to_alpha2(mass_ratio: float) -> float:
    """Effective pair strength of the induced heavy-heavy interaction: 2 - s1^2."""
    return 2.0 - s1_squared(mass_ratio)


def alpha2_to_mass_ratio(alpha2: float) -> float:
    """Invert alpha2 = 2 - s1^2(m_H/m_L) for alpha2 in (0, 2]."""
    if not (0.0 < alpha2 <= 2.0):
        raise ConfigError(f"alpha2 must lie in (0, 2], got {alpha2}")
    lam_c = _critical_mass_ratio()
    if alpha2 == 2.0:
        return lam_c
    target = 2.0 - alpha2

    def h(lam):
        return s1_squared(lam) - target

    return brentq(h, 1.05, lam_c, xtol=1e-10)


# ---------------------------------------------------------------------------
# fall-to-the-center study
# ---------------------------------------------------------------------------

@dataclass
class FallToCenterStudy:
    R_fixed: float
    r0_values: list
    strengths: list                # s(r0) = -W00 * 2 mu R^2 / hbar^2 - 1/4
    beta: float
    delta: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "R_fixed": self.R_fixed,
            "r0_values": self.r0_values,
            "strengths": self.strengths,
            "beta": self.beta,
            "delta": self.delta,
            "r_squared": self.r_squared,
        }


def fall_to_center_study(R_fixed: float, r0_values, cfg: ModelConfig) -> FallToCenterStudy:
    """Channel strength at fixed R for decreasing regularization length.

    Solves the lowest channel (with its diagonal correction) for each r0 and
    fits the square-root-log law (s + 1/4)^2 = beta ln(R/r0) + delta.
    """
    from .hyperangular import diagonal_correction, adiabatic_solve, build_mesh

    if cfg.alpha2 <= -0.25:
        raise ConfigError("fall-to-center study needs an attractive pair potential")
    r0_values = [float(r) for r in r0_values]
    if R_fixed < 20.0 * max(r0_values):
        raise ConfigError("R_fixed must be much larger than every r0 (>= 20x)")
    strengths = []
    for r0 in r0_values:
        c = cfg.with_(r0=r0)
        mesh = build_mesh(c, R_fixed)
        base = adiabatic_solve(R_fixed, c, 1, mesh=mesh)
        q = diagonal_correction(R_fixed, 0.02, c, mesh=mesh, base=base)
        w00 = base.U[0] + q[0]
        strengths.append(float(-w00 * TWO_MU3 * R_fixed**2 - 0.25))
    t = np.log(R_fixed / np.asarray(r0_values))
    y = (np.asarray(strengths) + 0.25) ** 2
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return FallToCenterStudy(R_fixed, r0_values, strengths,
                             float(coef[0]), float(coef[1]), r2)
