import math

import numpy as np
import pytest

from trimerlab.errors import MeshResolutionError, RelabelingError, UnsupportedSectorError
from trimerlab.hyperangular import (
    TWO_MU3,
    ChannelTable,
    MeshPolicy,
    adiabatic_solve,
    build_mesh,
    channel_table,
    diagonal_correction,
    full_domain_spectrum,
)
from trimerlab.model import FERMION_1P, CutoffForm, ModelConfig

FREE = ModelConfig(alpha2=-0.25)


@pytest.fixture(scope="module")
def free_solution():
    return adiabatic_solve(10.0, FREE, n_channels=4)


def test_free_case_scaled_eigenvalues(free_solution):
    # symmetric sector: K(K+4) + 15/4 for K = 0, 4, 6, 8
    assert abs(free_solution.u[0] - 3.75) < 3.75 * 1e-6
    assert abs(free_solution.u[1] - 35.75) < 35.75 * 1e-6
    assert abs(free_solution.u[2] - 63.75) < 63.75 * 1e-5
    assert abs(free_solution.u[3] - 99.75) < 99.75 * 1e-5


def test_free_case_energy_units(free_solution):
    U0 = free_solution.U[0]
    assert U0 == pytest.approx(3.75 / (TWO_MU3 * 100.0), rel=1e-9)


def test_orthonormality_gram(free_solution):
    gram = free_solution.gram()
    assert np.max(np.abs(gram - np.eye(gram.shape[0]))) < 1e-10


def test_free_case_q_vanishes():
    q = diagonal_correction(10.0, 0.01, FREE, n_channels=2)
    assert np.all(q >= 0)
    assert np.all(q < 1e-10)


def test_unsupported_sector_rejected():
    cfg = ModelConfig(alpha2=0.5, sector=FERMION_1P)
    with pytest.raises(UnsupportedSectorError):
        adiabatic_solve(10.0, cfg, 1)


def test_mesh_resolution_error():
    policy = MeshPolicy(eps_floor=1e-6)
    with pytest.raises(MeshResolutionError):
        build_mesh(ModelConfig(alpha2=0.0), 1e8, policy)


def test_full_domain_contains_reduced_spectrum(free_solution):
    full = full_domain_spectrum(10.0, FREE, k=10)
    for u in free_solution.u[:3]:
        assert np.min(np.abs(full - u)) < 1e-8 * max(abs(u), 1.0)
    # the unreduced spectrum also holds K=2 modes absent from the symmetric sector
    assert np.min(np.abs(full - 15.75)) < 1e-6


def test_pure_cutoff_channel_is_scale_free():
    cfg = ModelConfig(alpha2=-0.2, cutoff=CutoffForm.NONE)
    mesh = build_mesh(cfg, 10.0)
    a = adiabatic_solve(10.0, cfg, 2, mesh=mesh)
    b = adiabatic_solve(1000.0, cfg, 2, mesh=mesh)
    assert np.allclose(a.u, b.u, rtol=1e-10)
    q = diagonal_correction(10.0, 0.01, cfg, mesh=mesh, n_channels=1)
    assert q[0] < 1e-10


def test_strength_monotonicity_at_fixed_R():
    u_weak = adiabatic_solve(50.0, ModelConfig(alpha2=0.0), 1).u[0]
    u_strong = adiabatic_solve(50.0, ModelConfig(alpha2=0.1), 1).u[0]
    assert u_strong < u_weak


def test_richardson_step_halving_for_q():
    cfg = ModelConfig(alpha2=0.0)
    mesh = build_mesh(cfg, 1000.0)
    base = adiabatic_solve(1000.0, cfg, 1, mesh=mesh)
    q2 = diagonal_correction(1000.0, 0.02, cfg, mesh=mesh, base=base)[0]
    q1 = diagonal_correction(1000.0, 0.01, cfg, mesh=mesh, base=base)[0]
    q_extrap = (4 * q1 - q2) / 3
    assert abs(q1 / q_extrap - 1) < 0.01


@pytest.mark.slow
def test_channel_table_tracking_and_csv(tmp_path):
    cfg = ModelConfig(alpha2=0.0)
    grid = np.geomspace(10, 300, 9)
    tab = channel_table(cfg, grid, n_channels=2)
    assert np.all(tab.Q >= 0)
    assert np.all(tab.W >= tab.U)
    assert all(d["min_overlap"] > 0.9 for d in tab.diagnostics[1:])
    path = tmp_path / "channels.csv"
    tab.save(path, manifest_hash="cafe")
    text = path.read_text().splitlines()
    assert text[0] == "# manifest_hash=cafe"
    assert text[1] == "R,nu,U,Q,W,conv_est"
    back = ChannelTable.load(path)
    assert np.allclose(back.R, tab.R)
    assert np.allclose(back.W, tab.W)
    assert back.cfg == cfg


@pytest.mark.slow
def test_r0_scaling_of_tables():
    grid = np.geomspace(10, 200, 6)
    a = channel_table(ModelConfig(alpha2=0.0, r0=1.0), grid, n_channels=1)
    b = channel_table(ModelConfig(alpha2=0.0, r0=2.0), 2 * grid, n_channels=1)
    assert np.allclose(b.W[0], a.W[0] / 4.0, rtol=1e-6)
    assert np.allclose(b.U[0], a.U[0] / 4.0, rtol=1e-6)
