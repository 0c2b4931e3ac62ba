"""Fixed-R adiabatic eigensolver for the bosonic 0+ sector.

The adiabatic Hamiltonian on the reduced hyperangular domain
(theta in [0, pi/2], phi in [0, pi/3]) is

    H_ad = (hbar^2 / 2 mu R^2) [Lambda^2 + 15/4] + V(R; theta, phi),

    Lambda^2 f = -(4 / sin 2theta) d_theta( sin 2theta d_theta f )
                 - (4 / sin^2 theta) d^2_phi f,

with the measure weight sin(2 theta).  The factor 4 on the phi term is fixed
by the coordinate convention r_k ~ sqrt(1 + sin(theta) cos(phi - 2 pi k/3)):
J = 0 states are polynomials in the rotational invariants, so only even
hyperspherical degrees K may appear, and the free spectrum must be
K(K+4) = 0, 12, 32, ... (symmetric sector: 0, 32, 60, ...).  This also makes
the coincidence-corner problem exactly the critical 2D inverse-square system
at alpha2 = 0, which is the source of the logarithmic tail physics.

Neumann conditions at phi = 0 and
phi = pi/3 select the bosonic permutation-symmetric sector; conditions at
theta in {0, pi/2} are natural.  Discretization is cubic B-spline Galerkin on
a tensor mesh graded into the two-body coincidence corner
(theta = pi/2, phi = pi/3), whose angular width scales like r0 / R.

Everything is solved in scaled units u = U * 2 mu R^2 / hbar^2.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import (
    ConfigError,
    MeshResolutionError,
    RelabelingError,
    UnsupportedSectorError,
)
from .model import HBAR, MU3, CutoffForm, ModelConfig, total_potential_grid
from .splines import SplineBasis1D, tensor_potential_matrix
from .twobody import lowest_threshold

TWO_MU3 = 2.0 * MU3 / HBAR**2

#: angular width of the regularized region: r = r0 at corner distance
#: rho ~ sqrt(2) * 3**(1/4) * (r0 / R)
FEATURE_COEF = math.sqrt(2.0) * 3.0**0.25

THETA_MAX = math.pi / 2
PHI_MAX = math.pi / 3


@dataclass(frozen=True)
class MeshPolicy:
    """Grading rules for the per-R angular mesh."""

    nodes_across_feature: int = 8     # minimum nodes across the cutoff width
    core_extent: float = 2.0          # uniform core reaches core_extent * eps
    growth: float = 1.20              # geometric span-growth ratio
    far_spans_theta: int = 24         # cap spacing at (pi/2) / far_spans_theta
    far_spans_phi: int = 18
    quad_points: int = 6
    eps_floor: float = 1e-12
    pseudo_eps_none: float = 1e-3     # grading scale when cutoff is 'none'

    def to_dict(self) -> dict:
        return {
            "nodes_across_feature": self.nodes_across_feature,
            "core_extent": self.core_extent,
            "growth": self.growth,
            "far_spans_theta": self.far_spans_theta,
            "far_spans_phi": self.far_spans_phi,
            "quad_points": self.quad_points,
            "eps_floor": self.eps_floor,
            "pseudo_eps_none": self.pseudo_eps_none,
        }


def _graded_distances(length: float, eps: float, policy: MeshPolicy) -> np.ndarray:
    """Corner distances 0 .. length: uniform core, geometric growth, capped far zone."""
    # two extra spacings of margin so finite-difference solves at R*exp(+-dlnR)
    # still satisfy the resolution requirement on the same mesh
    h0 = eps / (policy.nodes_across_feature + 2)
    core_end = min(policy.core_extent * eps, 0.25 * length)
    n_core = max(2, int(round(core_end / h0)))
    pts = list(np.linspace(0.0, core_end, n_core + 1))
    hmax = length / policy.far_spans_theta if length == THETA_MAX else length / policy.far_spans_phi
    h = (pts[-1] - pts[-2]) * policy.growth
    d = pts[-1]
    while True:
        h = min(h, hmax)
        d = d + h
        if d >= length - 0.5 * h:
            break
        pts.append(d)
        h *= policy.growth
    pts.append(length)
    return np.asarray(pts)


def feature_scale(cfg: ModelConfig, R: float, policy: MeshPolicy) -> float:
    if cfg.cutoff is CutoffForm.NONE:
        return policy.pseudo_eps_none
    return FEATURE_COEF * cfg.r0 / R


@dataclass
class AngularMesh:
    """Tensor B-spline mesh graded into the coincidence corner."""

    theta_breaks: np.ndarray
    phi_breaks: np.ndarray
    eps: float
    policy: MeshPolicy
    basis_theta: SplineBasis1D = field(repr=False, default=None)
    basis_phi: SplineBasis1D = field(repr=False, default=None)

    def __post_init__(self):
        if self.basis_theta is None:
            self.basis_theta = SplineBasis1D(self.theta_breaks, 3, self.policy.quad_points)
        if self.basis_phi is None:
            self.basis_phi = SplineBasis1D(self.phi_breaks, 3, self.policy.quad_points)
        self._ops = None

    @property
    def ndof(self) -> int:
        return self.basis_theta.n * self.basis_phi.n

    def check_resolution(self, eps: float, tol: float = 1.0):
        """Require >= nodes_across_feature spacings across the feature width."""
        eps = min(eps, 0.05) * tol
        for br, corner in ((self.theta_breaks, THETA_MAX), (self.phi_breaks, PHI_MAX)):
            d = np.abs(corner - br)
            near = np.sort(d)[: self.policy.nodes_across_feature + 1]
            if near[-1] > eps * (1.0 + 1e-9):
                raise MeshResolutionError(
                    f"coincidence region of width {eps:.3e} covered by fewer than "
                    f"{self.policy.nodes_across_feature} node spacings"
                )

    def one_d_operators(self):
        """Cached weighted 1D Galerkin matrices (dense)."""
        if self._ops is None:
            bt, bp = self.basis_theta, self.basis_phi
            s2t = np.sin(2.0 * bt.xq)
            self._ops = {
                "Mt": bt.matrix(s2t),
                "Ktt": bt.matrix(4.0 * s2t, derivative=True),
                "Mts": bt.matrix(4.0 * s2t / np.sin(bt.xq) ** 2),
                "Mp": bp.matrix(1.0),
                "Kp": bp.matrix(1.0, derivative=True),
                "s2t": s2t,
            }
        return self._ops


def build_mesh(cfg: ModelConfig, R: float, policy: MeshPolicy | None = None) -> AngularMesh:
    policy = policy or MeshPolicy()
    eps = feature_scale(cfg, R, policy)
    if eps < policy.eps_floor:
        raise MeshResolutionError(
            f"feature width {eps:.3e} below the mesh floor {policy.eps_floor:.1e} "
            f"(R/r0 too large for the configured grading)"
        )
    eps = min(eps, 0.05)
    th = (THETA_MAX - _graded_distances(THETA_MAX, eps, policy))[::-1].copy()
    ph = (PHI_MAX - _graded_distances(PHI_MAX, eps, policy))[::-1].copy()
    th[0] = 0.0
    ph[0] = 0.0
    mesh = AngularMesh(th, ph, eps, policy)
    mesh.check_resolution(eps)
    return mesh


def assemble_operators(mesh: AngularMesh, cfg: ModelConfig, R: float):
    """Scaled Galerkin pencil (A, B): A x = u B x with u = U * 2 mu R^2 / hbar^2."""
    ops = mesh.one_d_operators()
    bt, bp = mesh.basis_theta, mesh.basis_phi
    K = sparse.kron(sparse.csr_matrix(ops["Ktt"]), sparse.csr_matrix(ops["Mp"])) + \
        sparse.kron(sparse.csr_matrix(ops["Mts"]), sparse.csr_matrix(ops["Kp"]))
    B = sparse.kron(sparse.csr_matrix(ops["Mt"]), sparse.csr_matrix(ops["Mp"])).tocsr()
    tq = bt.quad_flat()
    pq = bp.quad_flat()
    vvals = TWO_MU3 * R**2 * total_potential_grid(R, tq[:, None], pq[None, :], cfg)
    Vmat = tensor_potential_matrix(bt, bp, vvals, ops["s2t"])
    A = (K + 3.75 * B + Vmat).tocsr()
    return A, B, float(vvals.min())


def _lowest_eigenpairs(A, B, k, sigma, v0=None, tol=0.0):
    """Robust lowest-k generalized eigenpairs via shift-invert ARPACK.

    Retries with a larger subspace on non-convergence and walks sigma down if
    it did not sit comfortably below the lowest Ritz value.
    """
    ndof = A.shape[0]
    if v0 is None:
        v0 = np.ones(ndof)
    ncv = min(ndof - 1, max(4 * k + 20, 40))
    for attempt in range(4):
        try:
            vals, vecs = eigsh(A, k=k, M=B, sigma=sigma, which="LM", mode="normal",
                               v0=v0, ncv=ncv, tol=tol, maxiter=8000)
        except ArpackNoConvergence:
            ncv = min(ndof - 1, 2 * ncv)
            continue
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        gap = max(vals[-1] - vals[0], 0.1 * abs(vals[0]), 1.0)
        if sigma < vals[0] - 1e-3 * gap or attempt == 3:
            return vals, vecs
        sigma = vals[0] - gap
    raise ArpackNoConvergence("eigensolver failed after retries", [], [])


@dataclass
class AdiabaticSolution:
    """Eigenpairs of the fixed-R adiabatic Hamiltonian on one mesh."""

    R: float
    cfg: ModelConfig
    mesh: AngularMesh
    u: np.ndarray            # scaled eigenvalues U * 2 mu R^2 / hbar^2
    coeffs: np.ndarray       # (ndof, k) B-orthonormal spline coefficients
    residuals: np.ndarray
    B: sparse.csr_matrix = field(repr=False, default=None)

    @property
    def U(self) -> np.ndarray:
        """Channel potentials U_nu(R) in energy units."""
        return self.u / (TWO_MU3 * self.R**2)

    def channel_values(self, theta_pts, phi_pts):
        """Channel functions evaluated on a (theta, phi) tensor grid."""
        bt, bp = self.mesh.basis_theta, self.mesh.basis_phi
        Bt = bt.evaluate(np.eye(bt.n), theta_pts)      # (npts_t, n_t)
        Bp = bp.evaluate(np.eye(bp.n), phi_pts)        # (npts_p, n_p)
        out = []
        for j in range(self.coeffs.shape[1]):
            C = self.coeffs[:, j].reshape(bt.n, bp.n)
            out.append(Bt @ C @ Bp.T)
        return np.stack(out)

    def gram(self) -> np.ndarray:
        """B-weighted Gram matrix of the stored channel functions."""
        return self.coeffs.T @ (self.B @ self.coeffs)


def _require_boson_sector(cfg: ModelConfig):
    if not cfg.sector.is_bosonic_ground_sector:
        raise UnsupportedSectorError(
            f"hyperangular solver supports only the (boson, J=0, parity=+1) sector; "
            f"got ({cfg.sector.statistics}, J={cfg.sector.J}, parity={cfg.sector.parity:+d})"
        )


def _sigma_cold(cfg: ModelConfig, R: float, v_scaled_min: float) -> float:
    """Shift safely below u0 without destroying shift-invert separation."""
    if v_scaled_min >= -300.0:
        return v_scaled_min - 5.0
    if cfg.alpha2 > 0 and cfg.cutoff is not CutoffForm.NONE:
        e00 = _cached_threshold(cfg.alpha2, cfg.r0, cfg.cutoff.value)
        if e00 is not None:
            return 1.3 * TWO_MU3 * R**2 * e00 - 20.0
    # subcritical: u0 ~ -sqrt(beta ln R + delta) stays O(10)
    return -(40.0 + 8.0 * math.sqrt(max(math.log(max(R / cfg.r0, 2.0)), 1.0)))


def _cached_threshold(alpha2: float, r0: float, cutoff: str):
    key = (round(alpha2, 12), round(r0, 12), cutoff)
    if key not in _THRESHOLD_CACHE:
        cfg = ModelConfig(alpha2=alpha2, r0=r0, cutoff=CutoffForm(cutoff))
        _THRESHOLD_CACHE[key] = lowest_threshold(cfg, l=0, domain=(1e-4 * r0, 1e8 * r0))
    return _THRESHOLD_CACHE[key]


_THRESHOLD_CACHE: dict = {}


def _canonical_signs(coeffs: np.ndarray, B) -> np.ndarray:
    """Deterministic sign convention: positive B-weighted mean, else leading coeff."""
    ones = np.ones(coeffs.shape[0])
    means = ones @ (B @ coeffs)
    out = coeffs.copy()
    for j in range(coeffs.shape[1]):
        s = means[j]
        if abs(s) < 1e-10:
            idx = np.argmax(np.abs(coeffs[:, j]))
            s = coeffs[idx, j]
        if s < 0:
            out[:, j] = -out[:, j]
    return out


def adiabatic_solve(R: float, cfg: ModelConfig, n_channels: int = 1,
                    mesh: AngularMesh | None = None,
                    policy: MeshPolicy | None = None,
                    sigma_hint: float | None = None,
                    v0: np.ndarray | None = None,
                    eig_tol: float = 0.0) -> AdiabaticSolution:
    """Lowest adiabatic channels at fixed hyperradius.

    Raises :class:`UnsupportedSectorError` outside the bosonic 0+ sector and
    :class:`MeshResolutionError` when the coincidence region is under-resolved.
    """
    _require_boson_sector(cfg)
    if n_channels < 1:
        raise ConfigError("n_channels must be >= 1")
    if mesh is None:
        mesh = build_mesh(cfg, R, policy)
    else:
        # mild slack: reused meshes (finite-difference neighbors) may see a
        # slightly narrower feature than they were graded for
        mesh.check_resolution(feature_scale(cfg, R, mesh.policy), tol=1.1)
    A, B, vmin = assemble_operators(mesh, cfg, R)
    sigma = sigma_hint if sigma_hint is not None else _sigma_cold(cfg, R, vmin)
    vals, vecs = _lowest_eigenpairs(A, B, n_channels, sigma, v0=v0, tol=eig_tol)
    # enforce exact B-normalization and the deterministic sign convention
    for j in range(vecs.shape[1]):
        nj = math.sqrt(vecs[:, j] @ (B @ vecs[:, j]))
        vecs[:, j] /= nj
    vecs = _canonical_signs(vecs, B)
    res = np.array([
        np.linalg.norm(A @ vecs[:, j] - vals[j] * (B @ vecs[:, j]))
        / max(np.linalg.norm(B @ vecs[:, j]), 1e-300)
        for j in range(vecs.shape[1])
    ])
    return AdiabaticSolution(R, cfg, mesh, vals, vecs, res, B)


def _aligned_pair_solutions(base: AdiabaticSolution, dlnR: float):
    """Solutions at R*exp(+-dlnR) on base's mesh, channel-aligned to base."""
    R, cfg, mesh = base.R, base.cfg, base.mesh
    k = base.coeffs.shape[1]
    out = []
    for sgn in (-1.0, +1.0):
        Rs = R * math.exp(sgn * dlnR)
        sigma = base.u[0] * (Rs / R) ** 2 - max(0.15 * abs(base.u[0]), 5.0)
        sol = adiabatic_solve(Rs, cfg, k, mesh=mesh, sigma_hint=sigma,
                              v0=base.coeffs[:, 0].copy())
        overlap = base.coeffs.T @ (base.B @ sol.coeffs)
        perm, signs, min_ov = _match_channels(overlap)
        if min_ov < 0.5:
            raise RelabelingError(
                f"channel overlap {min_ov:.3f} < 0.5 near R = {R:g} "
                f"(probable channel crossing)", r_crossing=R,
            )
        sol.u = sol.u[perm]
        sol.coeffs = sol.coeffs[:, perm] * signs[None, :]
        out.append(sol)
    return out[0], out[1]


def _match_channels(overlap: np.ndarray):
    """Greedy column assignment maximizing |overlap|; returns (perm, signs, min)."""
    k, m = overlap.shape
    perm = np.full(k, -1, dtype=int)
    used = np.zeros(m, dtype=bool)
    mins = []
    for i in range(k):
        order = np.argsort(-np.abs(overlap[i]))
        for j in order:
            if not used[j]:
                perm[i] = j
                used[j] = True
                mins.append(abs(overlap[i, j]))
                break
    signs = np.sign(overlap[np.arange(k), perm])
    signs[signs == 0] = 1.0
    return perm, signs, float(min(mins)) if mins else 0.0


def diagonal_correction(R: float, dlnR: float, cfg: ModelConfig,
                        mesh: AngularMesh | None = None,
                        n_channels: int = 1,
                        base: AdiabaticSolution | None = None) -> np.ndarray:
    """Q_nu = (hbar^2 / 2 mu) || dPhi_nu / dR ||^2 by symmetric finite differences.

    Channel functions at R*exp(+-dlnR) are solved on the same mesh and
    phase-aligned by maximizing overlap; an overlap magnitude below 0.5
    raises :class:`RelabelingError` with the crossing location.
    """
    if base is None:
        base = adiabatic_solve(R, cfg, n_channels, mesh=mesh)
    lo, hi = _aligned_pair_solutions(base, dlnR)
    dR = base.R * (math.exp(dlnR) - math.exp(-dlnR))
    dphi = (hi.coeffs - lo.coeffs) / dR
    q = np.array([
        dphi[:, j] @ (base.B @ dphi[:, j]) for j in range(dphi.shape[1])
    ])
    return (HBAR**2 / (2.0 * MU3)) * q



# fixed probe grid used for cross-mesh channel tracking (deterministic)
_PROBE_THETA = THETA_MAX * (0.5 + 0.5 * np.cos(np.pi * (np.arange(1, 18)) / 18.0))[::-1]
_PROBE_PHI = PHI_MAX * (0.5 + 0.5 * np.cos(np.pi * (np.arange(1, 14)) / 14.0))[::-1]


def _probe_matrix(sol: AdiabaticSolution) -> np.ndarray:
    """Channel values on the fixed probe grid, each row normalized."""
    vals = sol.channel_values(_PROBE_THETA, _PROBE_PHI)
    flat = vals.reshape(vals.shape[0], -1)
    w = np.sqrt(np.sin(2.0 * _PROBE_THETA))[:, None] * np.ones_like(_PROBE_PHI)[None, :]
    flat = flat * w.ravel()[None, :]
    norms = np.linalg.norm(flat, axis=1)
    norms[norms == 0] = 1.0
    return flat / norms[:, None]


@dataclass
class ChannelTable:
    """Per-channel samples of U, Q, and W = U + Q on a log-spaced R grid."""

    cfg: ModelConfig
    R: np.ndarray                 # (nR,)
    U: np.ndarray                 # (n_channels, nR)
    Q: np.ndarray                 # (n_channels, nR)
    W: np.ndarray                 # (n_channels, nR)
    conv: np.ndarray              # (n_channels, nR) eigenresidual estimates
    policy: MeshPolicy
    dlnR: float
    diagnostics: list = field(default_factory=list)

    @property
    def n_channels(self) -> int:
        return self.U.shape[0]

    @property
    def r_range(self) -> tuple:
        return float(self.R[0]), float(self.R[-1])

    def scaled_w(self, nu: int = 0) -> np.ndarray:
        """Dimensionless -W * 2 mu R^2 / hbar^2 for channel nu."""
        return -self.W[nu] * TWO_MU3 * self.R**2

    def w_min_location(self, nu: int = 0) -> float:
        """Hyperradius of the sampled minimum of W_nu."""
        return float(self.R[int(np.argmin(self.W[nu]))])

    def content_hash(self) -> str:
        payload = json.dumps(
            {
                "model": self.cfg.to_dict(),
                "R": [repr(float(r)) for r in self.R],
                "policy": self.policy.to_dict(),
                "dlnR": self.dlnR,
                "n_channels": self.n_channels,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def save(self, csv_path, sidecar_path=None, manifest_hash: str | None = None):
        import csv as _csv

        with open(csv_path, "w", newline="") as f:
            if manifest_hash:
                f.write(f"# manifest_hash={manifest_hash}\n")
            w = _csv.writer(f)
            w.writerow(["R", "nu", "U", "Q", "W", "conv_est"])
            for i, r in enumerate(self.R):
                for nu in range(self.n_channels):
                    w.writerow([repr(float(r)), nu, repr(float(self.U[nu, i])),
                                repr(float(self.Q[nu, i])), repr(float(self.W[nu, i])),
                                repr(float(self.conv[nu, i]))])
        if sidecar_path is None:
            sidecar_path = str(csv_path) + ".json"
        sidecar = {
            "model": self.cfg.to_dict(),
            "mesh_policy": self.policy.to_dict(),
            "dlnR": self.dlnR,
            "n_channels": self.n_channels,
            "R_range": list(self.r_range),
            "content_hash": self.content_hash(),
            "diagnostics": self.diagnostics,
        }
        if manifest_hash:
            sidecar["manifest_hash"] = manifest_hash
        with open(sidecar_path, "w") as f:
            json.dump(sidecar, f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, csv_path, sidecar_path=None) -> "ChannelTable":
        import csv as _csv

        if sidecar_path is None:
            sidecar_path = str(csv_path) + ".json"
        with open(sidecar_path) as f:
            meta = json.load(f)
        cfg = ModelConfig.from_dict(meta["model"])
        rows = []
        with open(csv_path) as f:
            for line in f:
                if line.startswith("#"):
                    continue
                rows.append(line.strip())
        reader = _csv.reader(rows)
        header = next(reader)
        if header[:6] != ["R", "nu", "U", "Q", "W", "conv_est"]:
            raise ConfigError(f"unexpected channel CSV header: {header}")
        data = {}
        for rec in reader:
            r, nu = float(rec[0]), int(rec[1])
            data.setdefault(nu, []).append((r, float(rec[2]), float(rec[3]),
                                            float(rec[4]), float(rec[5])))
        n_ch = len(data)
        nr = len(data[0])
        R = np.array([row[0] for row in data[0]])
        U = np.zeros((n_ch, nr))
        Q = np.zeros((n_ch, nr))
        W = np.zeros((n_ch, nr))
        conv = np.zeros((n_ch, nr))
        for nu, rowlist in data.items():
            for i, (_, u, q, w_, c) in enumerate(rowlist):
                U[nu, i], Q[nu, i], W[nu, i], conv[nu, i] = u, q, w_, c
        policy = MeshPolicy(**meta["mesh_policy"])
        return cls(cfg, R, U, Q, W, conv, policy, meta["dlnR"], meta.get("diagnostics", []))


def solve_one_radius(cfg: ModelConfig, R: float, n_channels: int,
                     policy: MeshPolicy | None = None, dlnR: float = 0.02,
                     sigma_hint: float | None = None, eig_tol: float = 0.0) -> dict:
    """Central + finite-difference solves at one hyperradius.

    Returns U, Q, W, residuals, the probe matrix for cross-R tracking, and
    mesh diagnostics.  Independent across R values, so safe to parallelize.
    """
    mesh = build_mesh(cfg, R, policy)
    base = adiabatic_solve(R, cfg, n_channels, mesh=mesh,
                           sigma_hint=sigma_hint, eig_tol=eig_tol)
    lo, hi = _aligned_pair_solutions(base, dlnR)
    dR = R * (math.exp(dlnR) - math.exp(-dlnR))
    dphi = (hi.coeffs - lo.coeffs) / dR
    q = np.array([dphi[:, j] @ (base.B @ dphi[:, j]) for j in range(dphi.shape[1])])
    Q = (HBAR**2 / (2.0 * MU3)) * q
    U = base.U
    return {
        "R": R,
        "U": U,
        "Q": Q,
        "W": U + Q,
        "conv": base.residuals / np.maximum(np.abs(base.u), 1e-30),
        "probe": _probe_matrix(base),
        "u_scaled": base.u,
        "ndof": mesh.ndof,
        "eps": mesh.eps,
    }


def channel_table(cfg: ModelConfig, R_grid, n_channels: int = 1,
                  policy: MeshPolicy | None = None, dlnR: float = 0.02,
                  eig_tol: float = 0.0, workers: int = 1,
                  precomputed: list | None = None) -> ChannelTable:
    """Assemble a ChannelTable over an ascending log-spaced R grid.

    Channels are labeled by adiabatic continuation: each new sample is matched
    to the previous one by overlap on a fixed probe grid, never by energy sort
    alone.  With ``workers > 1`` the per-R solves run in a process pool; the
    merge is sequential in grid order, so results are schedule-independent.
    """
    _require_boson_sector(cfg)
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.ndim != 1 or R_grid.size < 2 or np.any(np.diff(R_grid) <= 0):
        raise ConfigError("R_grid must be ascending with at least 2 points")
    policy = policy or MeshPolicy()
    if precomputed is not None:
        results = precomputed
    elif workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [
                ex.submit(solve_one_radius, cfg, float(r), n_channels, policy, dlnR,
                          None, eig_tol)
                for r in R_grid
            ]
            results = [f.result() for f in futs]
    else:
        results = []
        sigma_hint = None
        u_hist = []
        for r in R_grid:
            res = solve_one_radius(cfg, float(r), n_channels, policy, dlnR,
                                   sigma_hint, eig_tol)
            results.append(res)
            u_hist.append((math.log(r), math.log(max(abs(res["u_scaled"][0]), 1e-12))))
            if len(u_hist) >= 2:
                (t0, y0), (t1, y1) = u_hist[-2], u_hist[-1]
                t2 = math.log(R_grid[min(len(results), len(R_grid) - 1)])
                y2 = y1 + (y1 - y0) * (t2 - t1) / max(t1 - t0, 1e-12)
                pred = -math.exp(y2) if res["u_scaled"][0] < 0 else res["u_scaled"][0]
                sigma_hint = 1.2 * pred - max(0.1 * abs(pred), 10.0)
            else:
                sigma_hint = None
    nR = len(results)
    U = np.zeros((n_channels, nR))
    Q = np.zeros((n_channels, nR))
    W = np.zeros((n_channels, nR))
    conv = np.zeros((n_channels, nR))
    diagnostics = []
    prev_probe = None
    for i, res in enumerate(results):
        if prev_probe is None:
            perm = np.arange(n_channels)
            min_ov = 1.0
        else:
            overlap = prev_probe @ res["probe"].T
            perm, _, min_ov = _match_channels(overlap)
        U[:, i] = res["U"][perm]
        Q[:, i] = res["Q"][perm]
        W[:, i] = res["W"][perm]
        conv[:, i] = res["conv"][perm]
        prev_probe = res["probe"][perm]
        diagnostics.append(
            {
                "R": res["R"],
                "ndof": res["ndof"],
                "eps": res["eps"],
                "min_overlap": float(min_ov),
                "max_residual": float(np.max(res["conv"])),
            }
        )
    return ChannelTable(cfg, R_grid, U, Q, W, conv, policy, dlnR, diagnostics)


def full_domain_spectrum(R: float, cfg: ModelConfig, k: int = 8,
                         policy: MeshPolicy | None = None,
                         n_phi: int | None = None) -> np.ndarray:
    """Brute-force oracle: scaled spectrum on the unreduced domain phi in [0, 2 pi).

    Uses a periodic uniform phi basis (no symmetry reduction) with the usual
    graded theta mesh.  The reduced-domain symmetric spectrum must appear as a
    subset.  Intended for moderate R where the regularized region is wide.
    """
    from .splines import PeriodicUniformSplineBasis1D

    _require_boson_sector(cfg)
    policy = policy or MeshPolicy()
    eps = feature_scale(cfg, R, policy)
    eps = min(max(eps, policy.eps_floor), 0.05)
    th = (THETA_MAX - _graded_distances(THETA_MAX, eps, policy))[::-1].copy()
    th[0] = 0.0
    bt = SplineBasis1D(th, 3, policy.quad_points)
    if n_phi is None:
        n_phi = int(min(max(2.0 * math.pi / (eps / policy.nodes_across_feature), 48), 720))
    bp = PeriodicUniformSplineBasis1D(0.0, 2.0 * math.pi, n_phi, policy.quad_points)
    s2t = np.sin(2.0 * bt.xq)
    K = sparse.kron(sparse.csr_matrix(bt.matrix(4.0 * s2t, derivative=True)),
                    sparse.csr_matrix(bp.matrix(1.0))) + \
        sparse.kron(sparse.csr_matrix(bt.matrix(4.0 * s2t / np.sin(bt.xq) ** 2)),
                    sparse.csr_matrix(bp.matrix(1.0, derivative=True)))
    B = sparse.kron(sparse.csr_matrix(bt.matrix(s2t)),
                    sparse.csr_matrix(bp.matrix(1.0))).tocsr()
    tq = bt.quad_flat()
    pq = bp.quad_flat()
    vvals = TWO_MU3 * R**2 * total_potential_grid(R, tq[:, None], pq[None, :], cfg)
    Vmat = tensor_potential_matrix(bt, bp, vvals, s2t)
    A = (K + 3.75 * B + Vmat).tocsr()
    sigma = _sigma_cold(cfg, R, float(vvals.min()))
    vals, _ = _lowest_eigenpairs(A, B, k, sigma)
    return vals
