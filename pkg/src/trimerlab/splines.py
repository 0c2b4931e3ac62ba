"""1D B-spline Galerkin utilities on graded breakpoint meshes.

Cubic B-splines with open (clamped) knot vectors and per-span Gauss-Legendre
quadrature.  Weighted mass/stiffness matrices are assembled from per-span
local arrays; Neumann conditions are natural in this weak form, so no basis
constraints are applied.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline


class SplineBasis1D:
    """Basis of degree-k B-splines on the given strictly increasing breakpoints."""

    def __init__(self, breakpoints, degree: int = 3, quad_points: int = 6):
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 3:
            raise ValueError("need at least 3 breakpoints")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        self.breaks = bp
        self.k = int(degree)
        self.t = np.concatenate([np.full(self.k, bp[0]), bp, np.full(self.k, bp[-1])])
        self.n = bp.size + self.k - 1
        self.nspans = bp.size - 1
        self.nq = int(quad_points)
        gx, gw = leggauss(self.nq)
        half = 0.5 * np.diff(bp)
        mid = 0.5 * (bp[:-1] + bp[1:])
        # quadrature points/weights per span, shape (nspans, nq)
        self.xq = mid[:, None] + half[:, None] * gx[None, :]
        self.wq = half[:, None] * gw[None, :]
        flat = self.xq.ravel()
        eye = np.eye(self.n)
        spl = BSpline(self.t, eye, self.k)
        vals = spl(flat)
        dvals = spl.derivative(1)(flat)
        # local (span, quad, active-basis) arrays; active indices are s..s+k
        self.B = np.empty((self.nspans, self.nq, self.k + 1))
        self.dB = np.empty_like(self.B)
        v3 = vals.reshape(self.nspans, self.nq, self.n)
        d3 = dvals.reshape(self.nspans, self.nq, self.n)
        for s in range(self.nspans):
            self.B[s] = v3[s, :, s : s + self.k + 1]
            self.dB[s] = d3[s, :, s : s + self.k + 1]
        # global indices of the active basis functions per span
        self.act = np.arange(self.nspans)[:, None] + np.arange(self.k + 1)[None, :]

    def quad_flat(self):
        return self.xq.ravel()

    def matrix(self, weight, derivative: bool = False) -> np.ndarray:
        """Dense (n, n) Galerkin matrix with the given weight at quad points.

        weight : array shaped like xq (or broadcastable); derivative=True uses
        basis-derivative products (stiffness-type).
        """
        w = np.broadcast_to(np.asarray(weight, dtype=float), self.xq.shape)
        F = self.dB if derivative else self.B
        loc = np.einsum("sq,sqa,sqb->sab", self.wq * w, F, F, optimize=True)
        out = np.zeros((self.n, self.n))
        for a in range(self.k + 1):
            for b in range(self.k + 1):
                np.add.at(out, (self.act[:, a], self.act[:, b]), loc[:, a, b])
        return out

    def evaluate(self, coeffs, x):
        """Evaluate spline(s) with coefficient columns `coeffs` at points x."""
        c = np.asarray(coeffs, dtype=float)
        return BSpline(self.t, c, self.k)(np.asarray(x, dtype=float))


class PeriodicUniformSplineBasis1D:
    """Periodic cubic B-splines on a uniform mesh over [x0, x1].

    Used only as the full-domain brute-force oracle; provides the same
    assembly interface as :class:`SplineBasis1D` (B, dB, wq, xq, act, matrix).
    """

    # uniform cubic B-spline segments on local xi in [0, 1]; segment m covers
    # the (m+1)-th span of a basis function's support
    _SEGS = (
        lambda x: x**3 / 6.0,
        lambda x: (1.0 + 3.0 * x + 3.0 * x**2 - 3.0 * x**3) / 6.0,
        lambda x: (4.0 - 6.0 * x**2 + 3.0 * x**3) / 6.0,
        lambda x: (1.0 - x) ** 3 / 6.0,
    )
    _DSEGS = (
        lambda x: x**2 / 2.0,
        lambda x: (3.0 + 6.0 * x - 9.0 * x**2) / 6.0,
        lambda x: (-12.0 * x + 9.0 * x**2) / 6.0,
        lambda x: -((1.0 - x) ** 2) / 2.0,
    )

    def __init__(self, x0: float, x1: float, nspans: int, quad_points: int = 6):
        if nspans < 8:
            raise ValueError("periodic basis needs at least 8 spans")
        self.k = 3
        self.n = nspans
        self.nspans = nspans
        self.nq = int(quad_points)
        self.breaks = np.linspace(x0, x1, nspans + 1)
        self.h = (x1 - x0) / nspans
        gx, gw = leggauss(self.nq)
        xi = 0.5 * (gx + 1.0)
        self.xq = self.breaks[:-1, None] + self.h * xi[None, :]
        self.wq = np.full((nspans, self.nq), 0.5 * self.h * 1.0) * gw[None, :]
        B1 = np.empty((self.nq, 4))
        dB1 = np.empty((self.nq, 4))
        for j in range(4):
            B1[:, j] = self._SEGS[3 - j](xi)
            dB1[:, j] = self._DSEGS[3 - j](xi) / self.h
        self.B = np.broadcast_to(B1, (nspans, self.nq, 4)).copy()
        self.dB = np.broadcast_to(dB1, (nspans, self.nq, 4)).copy()
        s = np.arange(nspans)[:, None]
        self.act = (s - 3 + np.arange(4)[None, :]) % nspans

    def quad_flat(self):
        return self.xq.ravel()

    def matrix(self, weight, derivative: bool = False) -> np.ndarray:
        w = np.broadcast_to(np.asarray(weight, dtype=float), self.xq.shape)
        F = self.dB if derivative else self.B
        loc = np.einsum("sq,sqa,sqb->sab", self.wq * w, F, F, optimize=True)
        out = np.zeros((self.n, self.n))
        for a in range(4):
            for b in range(4):
                np.add.at(out, (self.act[:, a], self.act[:, b]), loc[:, a, b])
        return out


def tensor_potential_matrix(bt: SplineBasis1D, bp: SplineBasis1D, vals, theta_weight):
    """Assemble the 2D Galerkin matrix of a nonseparable coefficient.

    Parameters
    ----------
    vals : ndarray, shape (Nq_theta, Nq_phi)
        Coefficient at the tensor quadrature grid (span-major flattening).
    theta_weight : ndarray
        Measure weight at theta quad points, broadcastable to bt.xq.

    Returns a CSR matrix on the tensor-product basis with global index
    ``i_theta * n_phi + i_phi``.
    """
    from scipy.sparse import coo_matrix

    nst, nqt, kt1 = bt.B.shape
    nsp, nqp, kp1 = bp.B.shape
    v = vals.reshape(nst, nqt, nsp, nqp)
    wt = bt.wq * np.broadcast_to(theta_weight, bt.xq.shape)   # (nst, nqt)
    t1 = np.einsum("tqsp,sp,spc,spd->tqscd", v, bp.wq, bp.B, bp.B, optimize=True)
    loc = np.einsum("tq,tqa,tqb,tqscd->tabscd", wt, bt.B, bt.B, t1, optimize=True)
    shape6 = loc.shape  # (nst, kt1, kt1, nsp, kp1, kp1)
    gt = bt.act.astype(np.int64)  # (nst, kt1)
    gp = bp.act.astype(np.int64)  # (nsp, kp1)
    rows = np.broadcast_to(
        gt[:, :, None, None, None, None] * bp.n + gp[None, None, None, :, :, None],
        shape6,
    ).ravel()
    cols = np.broadcast_to(
        gt[:, None, :, None, None, None] * bp.n + gp[None, None, None, :, None, :],
        shape6,
    ).ravel()
    ndof = bt.n * bp.n
    return coo_matrix((loc.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()
