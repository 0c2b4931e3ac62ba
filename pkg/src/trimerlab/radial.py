"""Log-domain radial bound-state engine shared by the two-body and hyperradial solvers.

Solves ``-(hbar^2 / 2 mu) F'' + W(r) F = E F`` on ``r > 0`` by Numerov shooting
in ``x = ln r`` with the transformed amplitude ``G = F / sqrt(r)``:

    G'' = q(x) G,   q = (2 mu / hbar^2) e^{2x} (W - E) + 1/4.

Each level is isolated by node-count bisection in ``log(-E)`` and refined by
bisection on the sign of the terminal amplitude, so deep and shallow levels of
a geometric ladder never share conditioning.  The per-level integration domain
adapts to a fixed multiple of the level's outer turning point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


_RESCALE = 1e250


@njit(cache=True)
def _sweep(q, h, g0, g1, i_end):
    """Numerov recursion G'' = q G from index 0 to i_end.

    Returns (node count, terminal value, rescale count).  The running pair is
    rescaled by 1e-250 whenever it overflows; the terminal value is the
    mantissa after `rescales` such rescalings.
    """
    c = h * h / 12.0
    nodes = 0
    rescales = 0
    a_prev = 1.0 - c * q[0]
    a_cur = 1.0 - c * q[1]
    for i in range(1, i_end):
        a_next = 1.0 - c * q[i + 1]
        g2 = ((2.0 + 10.0 * c * q[i]) * g1 - a_prev * g0) / a_next
        if (g2 < 0.0 and g1 > 0.0) or (g2 > 0.0 and g1 < 0.0):
            nodes += 1
        if abs(g2) > _RESCALE:
            g2 /= _RESCALE
            g1 /= _RESCALE
            rescales += 1
        g0 = g1
        g1 = g2
        a_prev = a_cur
        a_cur = a_next
    return nodes, g1, rescales


@njit(cache=True)
def _sweep_store(q, h, g0, g1, i_end, out):
    """Numerov recursion storing G[0..i_end]; rescales the stored past on overflow."""
    c = h * h / 12.0
    nodes = 0
    out[0] = g0
    out[1] = g1
    a_prev = 1.0 - c * q[0]
    a_cur = 1.0 - c * q[1]
    for i in range(1, i_end):
        a_next = 1.0 - c * q[i + 1]
        g2 = ((2.0 + 10.0 * c * q[i]) * out[i] - a_prev * out[i - 1]) / a_next
        if (g2 < 0.0 and out[i] > 0.0) or (g2 > 0.0 and out[i] < 0.0):
            nodes += 1
        out[i + 1] = g2
        if abs(g2) > _RESCALE:
            for j in range(i + 2):
                out[j] /= _RESCALE
        a_prev = a_cur
        a_cur = a_next
    return nodes


@dataclass
class LevelResult:
    n: int
    energy: float          # in the shifted frame if energy_offset != 0
    r_mean: float
    nodes: int
    r_inner: float         # inner turning point (or domain edge)
    r_outer: float         # outer turning point
    bracket_history: int   # number of node-count evaluations spent


@dataclass
class LadderResult:
    levels: list
    truncated: bool
    diagnostics: dict


class LogGridProblem:
    """A radial problem sampled on a uniform grid in x = ln r.

    Parameters
    ----------
    x : ndarray
        Uniform ascending grid in ln r covering the maximum usable domain.
    w : ndarray
        Potential W(e^x) on the grid (already in the shifted frame if an
        energy offset is used by the caller).
    two_mu : float
        Coefficient 2*mu_eff/hbar^2 of the kinetic term.
    start_exponent : float or None
        Regular small-r behavior G ~ e^{nu0 x}; None means a hard (Dirichlet)
        inner boundary, i.e. G(x0) = 0.
    """

    def __init__(self, x, w, two_mu, start_exponent=None):
        self.x = np.asarray(x, dtype=float)
        self.w = np.asarray(w, dtype=float)
        if self.x.size != self.w.size:
            raise ValueError("x and w must have equal length")
        if self.x.size < 16:
            raise ValueError("grid too short")
        self.h = float(self.x[1] - self.x[0])
        self.two_mu = float(two_mu)
        self.start_exponent = start_exponent
        self._e2x = self.two_mu * np.exp(2.0 * self.x)
        self._qw = self._e2x * self.w + 0.25

    def _start_pair(self):
        if self.start_exponent is None:
            return 0.0, 1e-160
        nu0 = self.start_exponent
        return 1e-160, 1e-160 * math.exp(nu0 * self.h)

    def _q(self, energy):
        return self._qw - energy * self._e2x

    def _turn_index(self, energy):
        """Largest index with W <= E (outer edge of the allowed region)."""
        allowed = np.nonzero(self.w <= energy)[0]
        return int(allowed[-1]) if allowed.size else -1

    def _i_stable(self, energy):
        """Last index where the Numerov recursion stays stable (h^2 q / 12 < 1/2).

        Sweeping this far makes node counts exact: the first spurious node of
        a truncated count would sit e^{-O(1/h)} beyond any turning point.
        """
        q_cap = 6.0 / self.h**2
        if energy >= 0:
            return self.x.size - 1
        x_stab = 0.5 * math.log(q_cap / (self.two_mu * (-energy)))
        i = int(np.searchsorted(self.x, x_stab))
        return min(max(i, 8), self.x.size - 1)

    def count_nodes(self, energy, pad_steps=None, i_end=None):
        if i_end is None:
            i_end = self._i_stable(energy)
        g0, g1 = self._start_pair()
        nodes, g_end, resc = _sweep(self._q(energy), self.h, g0, g1, i_end)
        return nodes, g_end, resc, i_end

    def shallowest_resolvable(self, pad_steps):
        """Upper energy bound whose padded domain still fits in the grid."""
        i_cap = self.x.size - 1 - pad_steps
        if i_cap < 4:
            return None
        tail = self.w[i_cap + 1 :]
        e_top = float(tail.min()) if tail.size else 0.0
        e_top = min(e_top, 0.0)
        # nudge strictly below to keep the turning point inside the cap
        return e_top - abs(e_top) * 1e-12 - 1e-300

    def solve_ladder(self, n_max, tol=1e-8, pad=3.0, require_inner_forbidden=False):
        """Find up to n_max levels ordered by increasing energy toward 0-.

        Returns a :class:`LadderResult`; ``truncated`` is set when the grid
        cannot hold the padded domain of the next level.
        """
        pad_steps = max(4, int(math.ceil(math.log(pad) / self.h)))
        w_min = float(self.w.min())
        if w_min >= 0.0:
            return LadderResult([], False, {"reason": "nowhere attractive"})
        e_top = self.shallowest_resolvable(pad_steps)
        if e_top is None or e_top <= w_min:
            return LadderResult([], True, {"reason": "domain cannot hold any level"})
        if require_inner_forbidden and self.w[0] <= e_top:
            raise ConvergenceError(
                "inner boundary is not in the classically forbidden region",
                {"w_inner": float(self.w[0]), "e_top": e_top},
            )
        n_top, _, _, _ = self.count_nodes(e_top)
        levels = []
        truncated = n_top < n_max
        n_found = min(n_max, n_top)
        e_prev = w_min
        for v in range(n_found):
            levels.append(self._solve_level(v, e_prev, e_top, n_top, tol, pad_steps))
            e_prev = levels[-1].energy
        return LadderResult(
            levels,
            truncated,
            {"n_resolvable": n_top, "e_top": e_top, "w_min": w_min},
        )

    def _solve_level(self, v, e_lo, e_hi, n_hi, tol, pad_steps):
        # Phase 1: bisect on node count in log(-E) until N(a)=v, N(b)=v+1 and
        # the bracket is narrow enough that one sweep domain serves both ends.
        a = e_lo if v == 0 else e_lo * (1.0 - 1e-12)
        b = e_hi
        n_a, _, _, _ = self.count_nodes(a)
        n_b = n_hi
        if n_a > v:
            raise ConvergenceError(
                f"lower bracket already has {n_a} nodes at level {v}",
                {"level": v, "e_lo": a},
            )
        evals = 1
        guard = 0
        while n_a != v or n_b != v + 1 or math.log(a / b) > 2.0:
            guard += 1
            if guard > 500:
                raise ConvergenceError(
                    f"node bracketing for level {v} did not close",
                    {"level": v, "bracket": (a, b), "counts": (n_a, n_b)},
                )
            m = -math.exp(0.5 * (math.log(-a) + math.log(-b)))
            n_m, _, _, _ = self.count_nodes(m)
            evals += 1
            if n_m <= v:
                a, n_a = m, n_m
            else:
                b, n_b = m, n_m
        # Phase 2: sign bisection on the terminal amplitude over a fixed
        # domain stable at the deep end and far beyond both turning points.
        i_end = self._i_stable(a)
        g0, g1 = self._start_pair()

        def f(e):
            _, g_end, resc = _sweep(self._q(e), self.h, g0, g1, i_end)
            return g_end, resc

        fa, _ = f(a)
        fb, _ = f(b)
        if fa == 0.0:
            e_star = a
        elif fb == 0.0:
            e_star = b
        else:
            if (fa > 0) == (fb > 0):
                raise ConvergenceError(
                    f"terminal amplitude does not change sign across level {v} bracket",
                    {"level": v, "bracket": (a, b)},
                )
            guard = 0
            while abs(a - b) > tol * abs(b):
                guard += 1
                if guard > 300:
                    break
                m = -math.exp(0.5 * (math.log(-a) + math.log(-b)))
                fm, _ = f(m)
                evals += 1
                if fm == 0.0:
                    a = b = m
                    break
                if (fm > 0) == (fa > 0):
                    a, fa = m, fm
                else:
                    b, fb = m, fm
            e_star = -math.exp(0.5 * (math.log(-a) + math.log(-b)))
        i_obs = min(self._turn_index(e_star) + pad_steps, self.x.size - 1,
                    self._i_stable(e_star))
        return self._finalize_level(v, e_star, max(i_obs, 8), evals)

    def _finalize_level(self, v, energy, i_end, evals):
        q = self._q(energy)
        g0, g1 = self._start_pair()
        it = self._turn_index(energy)
        i_match = max(min(it, i_end - 2), 2)
        g_out = np.zeros(i_match + 1)
        nodes_out = _sweep_store(q[: i_match + 1], self.h, g0, g1, i_match, g_out)
        # inward sweep: integrate the reversed problem from the outer end
        q_rev = q[i_match : i_end + 1][::-1].copy()
        g_in_rev = np.zeros(q_rev.size)
        kappa = math.sqrt(max(q[i_end], 1e-12))
        _sweep_store(q_rev, self.h, 1e-160, 1e-160 * math.exp(kappa * self.h),
                     q_rev.size - 1, g_in_rev)
        g_in = g_in_rev[::-1]
        if g_in[0] == 0.0 or not np.isfinite(g_in[0]):
            raise ConvergenceError(f"inward sweep degenerate at level {v}")
        scale = g_out[i_match] / g_in[0]
        g = np.concatenate([g_out[:i_match], g_in * scale])
        x = self.x[: i_end + 1]
        w_meas = g * g * np.exp(2.0 * x)
        norm = np.trapezoid(w_meas, x)
        if not (norm > 0 and np.isfinite(norm)):
            raise ConvergenceError(f"normalization failed at level {v}")
        r_mean = np.trapezoid(w_meas * np.exp(x), x) / norm
        nodes = int(np.count_nonzero(np.diff(np.sign(g[np.abs(g) > 0])) != 0))
        # inner turning point: first grid index in the allowed region
        allowed = np.nonzero(self.w <= energy)[0]
        r_in = float(np.exp(self.x[allowed[0]])) if allowed.size else float("nan")
        r_out = float(np.exp(self.x[it])) if it >= 0 else float("nan")
        if nodes != v:
            raise ConvergenceError(
                f"node theorem violated at level {v}: counted {nodes}",
                {"level": v, "nodes": nodes, "energy": energy},
            )
        return LevelResult(v, float(energy), float(r_mean), nodes, r_in, r_out, evals)


def dense_log_grid_energies(x, w, two_mu, n_levels, dirichlet_inner=True):
    """Independent oracle: finite-difference diagonalization on a dense log grid.

    Builds the standard symmetric tridiagonal eigenproblem for
    ``G'' = [(2 mu/hbar^2) e^{2x} (W - E) + 1/4] G`` with Dirichlet ends and
    returns the lowest ``n_levels`` negative eigenvalues.  Second-order
    accurate; intended for narrow-range cross-checks of the shooting path.
    """
    from scipy.linalg import eigh_tridiagonal

    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    h = x[1] - x[0]
    b = two_mu * np.exp(2.0 * x)
    # interior points only
    bi = b[1:-1]
    diag_a = 2.0 / h**2 + bi * w[1:-1] + 0.25
    off_a = np.full(bi.size - 1, -1.0 / h**2)
    s = 1.0 / np.sqrt(bi)
    diag = diag_a * s * s
    off = off_a * s[:-1] * s[1:]
    k = min(n_levels, bi.size - 1)
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1),
                            eigvals_only=True)
    return vals[vals < 0][:n_levels]
